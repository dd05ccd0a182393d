"""Crank-Nicolson Galerkin time stepping.

Each step solves, for ``u^{n+1}``,

    M (u^{n+1} - u^n) - dt/2 B(u^{n+1/2}) + dt K u^{n+1/2} = 0

with ``M`` the weighted mass matrix, ``K`` the Hilbert stiffness and
``B(u)_i = <u^2, (phi v_i)'>``, by the linearised fixed-point iteration

    (M + dt/2 K) w^{l+1} = (M - dt/2 K) u^n + dt/2 B((w^l + u^n) / 2),

starting from ``w^0 = u^n``.
"""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, IterationLimitExceeded, NonFiniteState
from .mesh_basis import HermiteField

CFL_MODES = ("full_line", "periodic", "theory")


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    t_end: float = 0.0
    stop_factor: float = 0.002
    max_iters: int = 100

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if not self.stop_factor > 0:
            raise ConfigurationError("stop_factor must be positive")
        if not self.t_end >= 0:
            raise ConfigurationError("t_end must be non-negative")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be at least 1")

    @property
    def num_steps(self):
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class StepReport:
    iterations_used: int
    final_residual: float
    l2_norm_after: float


@dataclass
class EvolveReport:
    steps: int = 0
    iteration_histogram: Counter = field(default_factory=Counter)
    snapshot_times: list = field(default_factory=list)
    max_residual: float = 0.0

    def record(self, rep):
        self.steps += 1
        self.iteration_histogram[rep.iterations_used] += 1
        self.max_residual = max(self.max_residual, rep.final_residual)

    @property
    def total_iterations(self):
        return sum(k * v for k, v in self.iteration_histogram.items())


def sup_norm(field, samples_per_element=8):
    """Sampled sup norm: nodes plus equispaced interior points of each element."""
    mesh = field.mesh
    xi = np.arange(samples_per_element + 1) / samples_per_element
    return float(np.max(np.abs(field(mesh.element_points(xi[:-1])))))


def cfl_timestep(mesh, mode, u0=None, lam=1.0):
    """Time step from the experiment rules.

    ``full_line``: ``0.5 dx / ||u0||_inf``; ``periodic``: ``0.5 dx``;
    ``theory``: ``lam dx^2``.
    """
    if mode == "periodic":
        return 0.5 * mesh.dx
    if mode == "theory":
        return lam * mesh.dx**2
    if mode == "full_line":
        if u0 is None:
            raise ConfigurationError("full_line time step needs the initial field")
        peak = sup_norm(u0)
        if peak == 0.0:
            raise ConfigurationError("full_line time step undefined for a zero field")
        return 0.5 * mesh.dx / peak
    raise ConfigurationError(f"unknown CFL mode {mode!r}")


def _fixed_point(ops, un, rhs_lin, tol, max_iters):
    half_dt = 0.5 * ops.dt
    w = un
    residual = np.inf
    for it in range(1, max_iters + 1):
        mid = 0.5 * (w + un)
        w_next = ops.solve(rhs_lin + half_dt * ops.nonlinear(mid))
        if not np.all(np.isfinite(w_next)):
            raise NonFiniteState(f"non-finite iterate at fixed-point iteration {it}")
        residual = ops.l2_norm(w_next - w)
        w = w_next
        if residual <= tol:
            return w, it, residual
    raise IterationLimitExceeded(
        f"fixed-point residual {residual:.3e} above {tol:.3e} after {max_iters} "
        "iterations; reduce dt",
        iterations=max_iters,
        residual=residual,
    )


def step(u_n, ops, cfg):
    """Advance one Crank-Nicolson step; returns ``(u_next, StepReport)``."""
    if not np.isclose(ops.dt, cfg.dt, rtol=1e-14, atol=0.0):
        raise ConfigurationError("operators were factorized for a different dt")
    un = u_n.coeffs
    if not np.any(un):
        return HermiteField(u_n.mesh, np.zeros_like(un)), StepReport(1, 0.0, 0.0)
    rhs_lin = ops.mass_w @ un - 0.5 * ops.dt * (ops.hilbert_stiff @ un)
    tol = cfg.stop_factor * ops.mesh.dx * ops.l2_norm(un)
    w, its, res = _fixed_point(ops, un, rhs_lin, tol, cfg.max_iters)
    return HermiteField(u_n.mesh, w), StepReport(its, res, ops.l2_norm(w))


def scheme_residual(u_n, u_next, ops):
    """Residual vector of the nonlinear Crank-Nicolson equations."""
    a, b = u_n.coeffs, u_next.coeffs
    mid = 0.5 * (a + b)
    return (
        ops.mass_w @ (b - a)
        - 0.5 * ops.dt * ops.nonlinear(mid)
        + ops.dt * (ops.hilbert_stiff @ mid)
    )


def evolve(u0_field, ops, cfg, snapshot_times=(), callback=None):
    """Run ``round(t_end / dt)`` steps and collect snapshots.

    Each requested time is served by the step whose time ``n dt`` is
    nearest to it; the actual times are stored in the report.  Returns
    ``(final_field, snapshots, report)``.
    """
    times = sorted(float(t) for t in snapshot_times)
    if times and times[-1] > cfg.t_end + 0.5 * cfg.dt:
        raise ConfigurationError("snapshot time beyond t_end")
    targets = {}
    for t in times:
        targets.setdefault(int(round(t / cfg.dt)), []).append(t)
    report = EvolveReport()
    snaps = {}
    u = u0_field
    nsteps = cfg.num_steps
    for n in range(nsteps + 1):
        if n in targets:
            for t in targets[n]:
                snaps[t] = u
            report.snapshot_times.extend([n * cfg.dt] * len(targets[n]))
        if callback is not None:
            callback(n, u)
        if n == nsteps:
            break
        u, rep = step(u, ops, cfg)
        report.record(rep)
    return u, [snaps[t] for t in times], report
