"""Crank-Nicolson / cubic Hermite Galerkin solver for the Benjamin-Ono equation

    u_t + u u_x - H u_xx = 0

on a periodic interval or, through a weighted formulation, a truncated line.
"""

from .errors import ConfigurationError, IterationLimitExceeded, NonFiniteState
from .exact_solutions import (
    DoubleSolitonParams,
    PeriodicWaveParams,
    double_soliton,
    double_soliton_dx,
    periodic_wave,
    periodic_wave_dx,
)
from .harness import (
    ConvergenceReport,
    emit_report,
    relative_l2_error,
    run_double_soliton_study,
    run_periodic_wave_study,
)
from .mesh_basis import HermiteField, UniformPeriodicMesh, evaluate, interpolate
from .operators import (
    AssembledOperators,
    WeightFunction,
    assemble_hilbert_stiffness,
    assemble_operators,
    assemble_weighted_mass,
    hilbert_derivative,
    nonlinear_form,
)
from .projection import project, projection_error
from .quadrature import QuadratureRule, gauss_legendre
from .solver import SchemeConfig, cfl_timestep, evolve, step

__version__ = "0.1.0"

__all__ = [
    "AssembledOperators", "ConfigurationError", "ConvergenceReport", "DoubleSolitonParams",
    "HermiteField", "IterationLimitExceeded", "NonFiniteState", "PeriodicWaveParams",
    "QuadratureRule", "SchemeConfig", "UniformPeriodicMesh", "WeightFunction",
    "assemble_hilbert_stiffness", "assemble_operators", "assemble_weighted_mass",
    "cfl_timestep", "double_soliton", "double_soliton_dx", "emit_report", "evaluate",
    "evolve", "gauss_legendre", "hilbert_derivative", "interpolate", "nonlinear_form",
    "periodic_wave", "periodic_wave_dx", "project", "projection_error",
    "relative_l2_error", "run_double_soliton_study", "run_periodic_wave_study", "step",
]
