"""Experiment presets, error metric and convergence tables."""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .exact_solutions import (
    DoubleSolitonParams,
    PeriodicWaveParams,
    double_soliton,
    periodic_wave,
    periodic_wave_dx,
)
from .mesh_basis import HermiteField, UniformPeriodicMesh, interpolate
from .operators import (
    WeightFunction,
    assemble_hilbert_stiffness,
    assemble_operators,
    nonlinear_form,
    weighted_test_derivatives,
)
from .projection import project, projection_error, orthogonality_residual
from .quadrature import gauss_legendre
from .solver import SchemeConfig, cfl_timestep, evolve

# reference relative errors for the two study presets
REFERENCE_TABLE2 = {
    16: 0.14960222, 32: 0.02807195, 64: 0.00577740, 128: 0.00129088,
    256: 0.00030683, 512: 0.00007805, 1024: 0.00002172,
}
REFERENCE_TABLE1 = {
    90: {128: 0.01844, 256: 0.05021, 512: 0.01678, 1024: 0.01044,
         2048: 0.00467, 4096: 0.00442},
    180: {128: 0.11959, 256: 0.29755, 512: 0.08869, 1024: 0.05295,
          2048: 0.01040, 4096: 0.00561},
}


def relative_l2_error(approx, exact, finest_grid):
    """``||approx - exact|| / ||exact||`` with trapezoidal L2 norms on a grid.

    ``approx`` is a Hermite field (or callable); ``exact`` a callable of x.
    """
    x = np.asarray(finest_grid, dtype=float)
    ref = np.asarray(exact(x), dtype=float)
    val = np.asarray(approx(x), dtype=float)
    denom = np.trapezoid(ref * ref, x)
    if denom == 0.0:
        raise ValueError("exact solution vanishes on the grid")
    return float(np.sqrt(np.trapezoid((val - ref) ** 2, x) / denom))


@dataclass
class ConvergenceRow:
    N: int
    E: float
    rate: float = None


@dataclass
class ConvergenceReport:
    experiment: str
    time: float
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_errors(cls, experiment, time, ns, errors, metadata=None):
        rows = [ConvergenceRow(int(n), float(e)) for n, e in zip(ns, errors)]
        for a, b in zip(rows[:-1], rows[1:]):
            a.rate = math.log2(a.E / b.E)
        return cls(experiment, time, rows, dict(metadata or {}))

    @property
    def rates(self):
        return [r.rate for r in self.rows[:-1]]

    def error(self, n):
        return next(r.E for r in self.rows if r.N == n)


def emit_report(report, path):
    """Write ``N,E,rate`` CSV plus a JSON sidecar with the metadata."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["N", "E", "rate"])
        for row in report.rows:
            rate = "" if row.rate is None else f"{row.rate:.2f}"
            writer.writerow([row.N, f"{row.E:.8f}", rate])
    meta = {"experiment": report.experiment, "time": report.time, **report.metadata}
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_report_csv(path):
    with Path(path).open() as fh:
        return [
            (int(r["N"]), float(r["E"]), float(r["rate"]) if r["rate"] else None)
            for r in csv.DictReader(fh)
        ]


def _check_doubling(ns):
    ns = list(ns)
    if any(b != 2 * a for a, b in zip(ns[:-1], ns[1:])):
        raise ValueError(f"element counts must double row to row, got {ns}")
    return ns


# -- single runs -------------------------------------------------------------


def periodic_wave_case(n, t_target=480.0, c=0.25, L=15.0, stop_factor=0.002,
                       finest_grid=None):
    p = PeriodicWaveParams(c, L)
    mesh = UniformPeriodicMesh(-L, L, n)
    u0 = project(lambda x: periodic_wave(x, 0.0, p), mesh)
    dt = cfl_timestep(mesh, "periodic")
    ops = assemble_operators(mesh, WeightFunction.unit(), dt)
    cfg = SchemeConfig(dt=dt, t_end=t_target, stop_factor=stop_factor)
    u, _, rep = evolve(u0, ops, cfg)
    t_reached = cfg.num_steps * dt
    grid = mesh.sample_grid() if finest_grid is None else finest_grid
    err = relative_l2_error(u, lambda x: periodic_wave(x, t_reached, p), grid)
    return {
        "N": n, "dt": dt, "t_reached": t_reached, "E": err,
        "iterations": dict(sorted(rep.iteration_histogram.items())),
    }


def double_soliton_case(n, times=(90.0, 180.0), domain=(-100.0, 100.0), weight=None,
                        params=None, stop_factor=0.002, finest_grid=None, kernel=None):
    p = params or DoubleSolitonParams()
    weight = weight or WeightFunction.linear(120.0, 1.0)
    mesh = UniformPeriodicMesh(domain[0], domain[1], n)
    u0 = project(lambda x: double_soliton(x, 0.0, p), mesh)
    dt = cfl_timestep(mesh, "full_line", u0)
    ops = assemble_operators(mesh, weight, dt, kernel=kernel)
    cfg = SchemeConfig(dt=dt, t_end=max(times), stop_factor=stop_factor)
    _, snaps, rep = evolve(u0, ops, cfg, times)
    grid = mesh.sample_grid() if finest_grid is None else finest_grid
    errors = {}
    for t, snap, t_act in zip(sorted(times), snaps, rep.snapshot_times):
        errors[t] = relative_l2_error(snap, lambda x: double_soliton(x, t_act, p), grid)
    return {
        "N": n, "dt": dt, "t_reached": rep.snapshot_times, "E": errors,
        "iterations": dict(sorted(rep.iteration_histogram.items())),
        "kernel": ops.kernel,
    }


def _map(fn, jobs, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, *zip(*jobs)))
    return [fn(*job) for job in jobs]


def run_periodic_wave_study(n_list, t_target=480.0, c=0.25, L=15.0, stop_factor=0.002,
                            workers=1):
    """Single-wave convergence table (dt = 0.5 dx)."""
    ns = _check_doubling(n_list)
    grid = UniformPeriodicMesh(-L, L, max(ns)).sample_grid()
    jobs = [(n, t_target, c, L, stop_factor, grid) for n in ns]
    cases = _map(periodic_wave_case, jobs, workers)
    meta = {
        "dt_rule": "0.5*dx", "c": c, "L": L, "stop_factor": stop_factor,
        "t_target": t_target,
        "runs": [{k: v for k, v in case.items() if k != "E"} for case in cases],
    }
    return ConvergenceReport.from_errors(
        "periodic_wave", t_target, ns, [case["E"] for case in cases], meta)


def run_double_soliton_study(n_list, times=(90.0, 180.0), domain=(-100.0, 100.0),
                             weight=None, params=None, stop_factor=0.002, workers=1,
                             kernel=None):
    """Double-soliton tables, one report per requested time."""
    ns = _check_doubling(n_list)
    weight = weight or WeightFunction.linear(120.0, 1.0)
    p = params or DoubleSolitonParams()
    grid = UniformPeriodicMesh(domain[0], domain[1], max(ns)).sample_grid()
    jobs = [(n, tuple(times), tuple(domain), weight, p, stop_factor, grid, kernel)
            for n in ns]
    cases = _map(double_soliton_case, jobs, workers)
    meta = {
        "dt_rule": "0.5*dx/max|u0|", "domain": list(domain), "weight": weight.describe(),
        "params": asdict(p), "stop_factor": stop_factor,
        "runs": [{k: v for k, v in case.items() if k != "E"} for case in cases],
    }
    return {
        t: ConvergenceReport.from_errors(
            "double_soliton", t, ns, [case["E"][t] for case in cases], meta)
        for t in sorted(times)
    }


def run_temporal_study(n=256, t_end=5.0, dts=(0.125, 0.0625, 0.03125, 0.015625),
                       c=0.25, L=15.0, stop_factor=1e-10):
    """Errors of the single-wave run at a fixed mesh for a sequence of time steps."""
    p = PeriodicWaveParams(c, L)
    mesh = UniformPeriodicMesh(-L, L, n)
    u0 = project(lambda x: periodic_wave(x, 0.0, p), mesh)
    base = assemble_operators(mesh, WeightFunction.unit(), dts[0])
    grid = mesh.sample_grid()
    errors = []
    for dt in dts:
        ops = base if dt == base.dt else base.with_dt(dt)
        cfg = SchemeConfig(dt=dt, t_end=t_end, stop_factor=stop_factor)
        u, _, _ = evolve(u0, ops, cfg)
        t_act = cfg.num_steps * dt
        errors.append(relative_l2_error(u, lambda x: periodic_wave(x, t_act, p), grid))
    rates = [math.log2(a / b) for a, b in zip(errors[:-1], errors[1:])]
    return list(dts), errors, rates


def projection_rate_table(n_list=(16, 32, 64, 128), L=15.0, k=1):
    """L2 and H1-seminorm errors of the L2 projection of ``sin(k pi x / L)``."""
    kap = k * np.pi / L
    u = lambda x: np.sin(kap * x)  # noqa: E731
    du = lambda x: kap * np.cos(kap * x)  # noqa: E731
    rows = []
    for n in n_list:
        mesh = UniformPeriodicMesh(-L, L, n)
        pu = project(u, mesh)
        rows.append({
            "N": n,
            "L2": projection_error(u, pu, 0),
            "H1": projection_error(u, pu, 1, du=du),
            "orthogonality": orthogonality_residual(u, pu),
        })
    for a, b in zip(rows[:-1], rows[1:]):
        a["rate_L2"] = math.log2(a["L2"] / b["L2"])
        a["rate_H1"] = math.log2(a["H1"] / b["H1"])
    return rows


# -- operator diagnostics ----------------------------------------------------


def multiplier_error(mesh, k, stiff=None):
    """Relative mismatch between ``K`` applied to the ``sin`` interpolant and
    the form tested against the exact ``H (sin)' = (-cos)'``."""
    L = mesh.half_period
    kap = k * np.pi / L
    if stiff is None:
        stiff = assemble_hilbert_stiffness(mesh, WeightFunction.unit(), kernel="periodic")
    u = interpolate(lambda x: np.sin(kap * (x - mesh.left)),
                    lambda x: kap * np.cos(kap * (x - mesh.left)), mesh)
    xi, wq = gauss_legendre(16).on_unit()
    pts = mesh.element_points(xi)
    test = weighted_test_derivatives(mesh, WeightFunction.unit(), xi)
    # H sin = -cos, so (H u)' = kap sin
    local = np.einsum("mq,q,mqk->mk", kap * np.sin(kap * (pts - mesh.left)),
                      wq * mesh.dx, test)
    ref = np.zeros(mesh.ndofs)
    np.add.at(ref, mesh.element_dofs().ravel(), local.ravel())
    return float(np.linalg.norm(stiff @ u.coeffs - ref) / np.linalg.norm(ref))


def operator_diagnostics(n=64, L=15.0, seed=0):
    """Skew-symmetry, multiplier convergence and conservation checks.

    Returns a list of ``(name, value, threshold, ok)`` tuples.
    """
    checks = []
    mesh = UniformPeriodicMesh(-L, L, n)
    unit = WeightFunction.unit()
    stiff = assemble_hilbert_stiffness(mesh, unit, kernel="periodic")
    skew = float(np.max(np.abs(stiff + stiff.T)) / np.max(np.abs(stiff)))
    checks.append(("hilbert_skew_symmetry", skew, 1e-8, skew <= 1e-8))

    coarse = UniformPeriodicMesh(-L, L, n // 2)
    coarse_stiff = assemble_hilbert_stiffness(coarse, unit, kernel="periodic")
    for k in range(1, 5):
        e1 = multiplier_error(coarse, k, coarse_stiff)
        e2 = multiplier_error(mesh, k, stiff)
        rate = math.log2(e1 / e2)
        checks.append((f"multiplier_rate_k{k}", rate, 2.0, rate >= 2.0 - 0.05))

    rng = np.random.default_rng(seed)
    u = HermiteField(mesh, rng.standard_normal(mesh.ndofs))
    b = nonlinear_form(u, unit)
    anti = abs(float(u.coeffs @ b))
    bound = 1e-9 * float(np.linalg.norm(u.coeffs)) ** 3
    checks.append(("nonlinear_antisymmetry", anti, bound, anti <= bound))

    p = PeriodicWaveParams(0.25, L)
    u0 = project(lambda x: periodic_wave(x, 0.0, p), mesh)
    dt = cfl_timestep(mesh, "periodic")
    ops = assemble_operators(mesh, unit, dt)
    cfg = SchemeConfig(dt=dt, t_end=20 * dt, stop_factor=1e-10)
    uN, _, _ = evolve(u0, ops, cfg)
    drift = abs(ops.l2_norm(uN.coeffs) - ops.l2_norm(u0.coeffs)) / ops.l2_norm(u0.coeffs)
    checks.append(("l2_conservation_20_steps", drift, 1e-8, drift <= 1e-8))
    return checks


def semidiscrete_residual(n, L=15.0, c=0.25):
    """Weak-form residual of the exact single wave, relative to ``||u_t||``.

    ``<u_t, v> - 1/2 <u^2, v'> + <H u', v'>`` with ``u`` the Hermite
    interpolant of the exact wave at ``t = 0`` and ``u_t = -c u'``.
    """
    p = PeriodicWaveParams(c, L)
    mesh = UniformPeriodicMesh(-L, L, n)
    u = interpolate(lambda x: periodic_wave(x, 0.0, p),
                    lambda x: periodic_wave_dx(x, 0.0, p), mesh)
    ops = assemble_operators(mesh, WeightFunction.unit(), 1.0)
    # travelling wave: u_t = -c u_x, so (u_t)_x = -c u_xx
    ut = interpolate(lambda x: -c * periodic_wave_dx(x, 0.0, p),
                     lambda x: -c * _wave_dxx(x, p), mesh)
    lhs = ops.mass_w @ ut.coeffs
    res = lhs - 0.5 * ops.nonlinear(u.coeffs) + ops.hilbert_stiff @ u.coeffs
    return float(np.linalg.norm(res) / np.linalg.norm(lhs))


def _wave_dxx(x, p, h=1e-4):
    return (periodic_wave_dx(x + h, 0.0, p) - periodic_wave_dx(x - h, 0.0, p)) / (2 * h)


__all__ = [
    "ConvergenceReport", "ConvergenceRow", "REFERENCE_TABLE1", "REFERENCE_TABLE2",
    "double_soliton_case", "emit_report", "multiplier_error",
    "operator_diagnostics", "periodic_wave_case", "projection_rate_table",
    "read_report_csv", "relative_l2_error", "run_double_soliton_study",
    "run_periodic_wave_study", "run_temporal_study", "semidiscrete_residual",
]
