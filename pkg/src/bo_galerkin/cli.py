"""Command line entry point: ``bo-galerkin {run,converge,project-test,check-operators}``."""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import ConfigurationError, IterationLimitExceeded, NonFiniteState
from .exact_solutions import (
    DoubleSolitonParams,
    PeriodicWaveParams,
    double_soliton,
    periodic_wave,
)
from .mesh_basis import UniformPeriodicMesh
from .operators import KERNELS, WeightFunction, assemble_operators
from .projection import project
from .solver import SchemeConfig, cfl_timestep, evolve

log = logging.getLogger("bo_galerkin")

EXIT_OK, EXIT_SOLVER, EXIT_USAGE, EXIT_DIAGNOSTIC = 0, 1, 2, 3

PROBLEMS = ("periodic-wave", "double-soliton", "custom-initial")
PRESET_DEFAULTS = {
    "periodic-wave": {"domain": [-15.0, 15.0], "weight": "unit", "dt_mode": "periodic",
                      "t_end": 480.0, "elements": 64},
    "double-soliton": {"domain": [-100.0, 100.0], "weight": "linear:120,1",
                       "dt_mode": "full-line", "t_end": 180.0, "elements": 512},
    "custom-initial": {"weight": "unit", "dt_mode": "periodic", "t_end": 1.0,
                       "elements": 64},
}
RUN_KEYS = ("problem", "elements", "t_end", "snapshots", "weight", "dt_mode",
            "stop_factor", "max_iters", "domain", "initial", "kernel", "wave_speed",
            "out", "dump_matrices")


def parse_weight(text):
    kind, _, rest = str(text).partition(":")
    try:
        if kind == "unit" and not rest:
            return WeightFunction.unit()
        if kind == "linear":
            a, b = (float(v) for v in rest.split(","))
            return WeightFunction.linear(a, b)
        if kind == "cutoff":
            return WeightFunction.smooth_cutoff(float(rest))
    except ValueError:
        pass
    raise ConfigurationError(f"bad weight {text!r}; use unit, linear:a,b or cutoff:R")


def parse_dt_mode(text):
    kind, _, rest = str(text).partition(":")
    if kind == "periodic" and not rest:
        return "periodic", 1.0
    if kind == "full-line" and not rest:
        return "full_line", 1.0
    if kind == "theory":
        try:
            return "theory", float(rest) if rest else 1.0
        except ValueError:
            pass
    raise ConfigurationError(f"bad dt mode {text!r}; use periodic, full-line or theory:lambda")


def _float_list(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _initial_from_expression(expr):
    namespace = {"np": np, "pi": np.pi, "exp": np.exp, "sin": np.sin, "cos": np.cos,
                 "cosh": np.cosh, "tanh": np.tanh, "sqrt": np.sqrt}

    def u0(x):
        out = eval(expr, {"__builtins__": {}}, {**namespace, "x": x})  # noqa: S307
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(x)).copy()

    return u0


def _write_snapshot(path, field, samples_per_element=4):
    mesh = field.mesh
    x = mesh.left + mesh.dx / samples_per_element * np.arange(
        mesh.num_elements * samples_per_element + 1)
    np.savetxt(path, np.column_stack([x, field(x)]), delimiter=",", header="x,u",
               comments="", fmt="%.12e")


def _dump_matrix(path, mat):
    rows, cols = np.nonzero(mat)
    np.savetxt(path, np.column_stack([rows, cols, mat[rows, cols]]), delimiter=",",
               header="row,col,value", comments="", fmt=["%d", "%d", "%.17e"])


def _resolve_run_config(args):
    cfg = {}
    if args.config:
        cfg.update(json.loads(Path(args.config).read_text()))
        unknown = set(cfg) - set(RUN_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    for key in RUN_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    problem = cfg.get("problem", "periodic-wave")
    if problem not in PROBLEMS:
        raise ConfigurationError(f"unknown problem {problem!r}")
    for key, val in PRESET_DEFAULTS[problem].items():
        if key == "t_end" and cfg.get("snapshots"):
            continue
        cfg.setdefault(key, val)
    cfg["problem"] = problem
    cfg.setdefault("stop_factor", 0.002)
    cfg.setdefault("max_iters", 100)
    cfg.setdefault("out", "out")
    cfg.setdefault("kernel", None)
    cfg.setdefault("dump_matrices", False)
    if isinstance(cfg.get("domain"), str):
        cfg["domain"] = _float_list(cfg["domain"])
    if isinstance(cfg.get("snapshots"), str):
        cfg["snapshots"] = _float_list(cfg["snapshots"])
    cfg["snapshots"] = sorted(float(t) for t in (cfg.get("snapshots") or [cfg["t_end"]]))
    cfg.setdefault("t_end", cfg["snapshots"][-1])
    if problem == "custom-initial":
        if "domain" not in cfg or "initial" not in cfg:
            raise ConfigurationError("custom-initial needs --domain and --initial")
    if len(cfg["domain"]) != 2:
        raise ConfigurationError("domain must be two numbers a,b")
    return cfg


def cmd_run(args):
    cfg = _resolve_run_config(args)
    a, b = cfg["domain"]
    mesh = UniformPeriodicMesh(a, b, int(cfg["elements"]))
    weight = parse_weight(cfg["weight"])
    mode, lam = parse_dt_mode(cfg["dt_mode"])

    exact = None
    if cfg["problem"] == "periodic-wave":
        p = PeriodicWaveParams(cfg.get("wave_speed") or 0.25, mesh.half_period)
        exact = lambda x, t: periodic_wave(x - mesh.left - mesh.half_period, t, p)  # noqa: E731
        u0_fn = lambda x: exact(x, 0.0)  # noqa: E731
    elif cfg["problem"] == "double-soliton":
        p = DoubleSolitonParams()
        exact = lambda x, t: double_soliton(x, t, p)  # noqa: E731
        u0_fn = lambda x: exact(x, 0.0)  # noqa: E731
    else:
        u0_fn = _initial_from_expression(cfg["initial"])

    u0 = project(u0_fn, mesh)
    dt = cfl_timestep(mesh, mode, u0, lam)
    t_end = max(cfg["snapshots"] + [float(cfg["t_end"])])
    scheme = SchemeConfig(dt=dt, t_end=t_end, stop_factor=float(cfg["stop_factor"]),
                          max_iters=int(cfg["max_iters"]))
    ops = assemble_operators(mesh, weight, dt, kernel=cfg["kernel"])
    log.info("N=%d dt=%.6g steps=%d kernel=%s weight=%s", mesh.num_elements, dt,
             scheme.num_steps, ops.kernel, weight.describe())

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{cfg['problem'].replace('-', '_')}_{mesh.num_elements}"
    effective = {**cfg, "dt": dt, "num_steps": scheme.num_steps, "kernel": ops.kernel}
    (out / f"{stem}_config.json").write_text(json.dumps(effective, indent=2) + "\n")
    if cfg["dump_matrices"]:
        _dump_matrix(out / f"{stem}_mass.csv", ops.mass_w)
        _dump_matrix(out / f"{stem}_hilbert.csv", ops.hilbert_stiff)

    _, snaps, report = evolve(u0, ops, scheme, cfg["snapshots"])
    records = []
    for t_req, t_act, snap in zip(cfg["snapshots"], report.snapshot_times, snaps):
        name = f"{stem}_t{t_req:g}.csv" if len(snaps) > 1 else f"{stem}.csv"
        _write_snapshot(out / name, snap)
        rec = {"file": name, "t_requested": t_req, "t_reached": t_act,
               "l2_norm": ops.l2_norm(snap.coeffs)}
        if exact is not None:
            rec["relative_l2_error"] = harness.relative_l2_error(
                snap, lambda x: exact(x, t_act), mesh.sample_grid())
        records.append(rec)
        log.info("t=%g %s", t_act, {k: v for k, v in rec.items() if k != "file"})
    side = {
        "N": mesh.num_elements, "dt": dt, "steps": report.steps, "kernel": ops.kernel,
        "iteration_histogram": {str(k): v for k, v in sorted(report.iteration_histogram.items())},
        "max_residual": report.max_residual, "snapshots": records,
    }
    (out / f"{stem}.json").write_text(json.dumps(side, indent=2) + "\n")
    print(json.dumps(side["snapshots"], indent=2))
    return EXIT_OK


def cmd_converge(args):
    out = Path(args.out)
    if args.preset == "table2":
        ns = args.n_list or [16, 32, 64, 128, 256]
        rep = harness.run_periodic_wave_study(ns, stop_factor=args.stop_factor,
                                              workers=args.workers)
        reports = {"table2": rep}
    else:
        ns = args.n_list or [128, 256, 512, 1024]
        reps = harness.run_double_soliton_study(ns, stop_factor=args.stop_factor,
                                                workers=args.workers)
        reports = {f"table1_t{t:g}": r for t, r in reps.items()}
    for name, rep in reports.items():
        path = harness.emit_report(rep, out / f"{name}.csv")
        print(f"# {name} (t={rep.time:g}) -> {path}")
        print(path.read_text(), end="")
    return EXIT_OK


def cmd_project_test(args):
    rows = harness.projection_rate_table(args.n_list or [16, 32, 64, 128])
    print("N,L2,rate_L2,H1,rate_H1,orthogonality")
    bad = False
    for r in rows:
        print(f"{r['N']},{r['L2']:.3e},{r.get('rate_L2', float('nan')):.2f},"
              f"{r['H1']:.3e},{r.get('rate_H1', float('nan')):.2f},{r['orthogonality']:.1e}")
        if "rate_L2" in r:
            bad |= not (3.7 <= r["rate_L2"] <= 4.3 and 2.7 <= r["rate_H1"] <= 3.3)
    return EXIT_DIAGNOSTIC if bad else EXIT_OK


def cmd_check_operators(args):
    checks = harness.operator_diagnostics(args.elements)
    ok = True
    for name, value, threshold, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {value:.3e} (threshold {threshold:.1e})")
        ok &= passed
    return EXIT_OK if ok else EXIT_DIAGNOSTIC


def build_parser():
    parser = argparse.ArgumentParser(prog="bo-galerkin", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evolve one initial condition")
    run.add_argument("--config", help="JSON file with run options; flags override it")
    run.add_argument("--problem", choices=PROBLEMS)
    run.add_argument("--elements", type=int)
    run.add_argument("--t-end", type=float, dest="t_end")
    run.add_argument("--snapshots", type=_float_list, help="comma-separated times")
    run.add_argument("--weight", help="unit | linear:a,b | cutoff:R")
    run.add_argument("--dt-mode", dest="dt_mode", help="periodic | full-line | theory:lambda")
    run.add_argument("--stop-factor", type=float, dest="stop_factor")
    run.add_argument("--max-iters", type=int, dest="max_iters")
    run.add_argument("--domain", type=_float_list, help="a,b")
    run.add_argument("--initial", help="numpy expression in x (custom-initial)")
    run.add_argument("--wave-speed", type=float, dest="wave_speed")
    run.add_argument("--kernel", choices=KERNELS)
    run.add_argument("--dump-matrices", action="store_true", default=None,
                     dest="dump_matrices")
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)

    conv = sub.add_parser("converge", help="spatial convergence tables")
    conv.add_argument("--preset", choices=("table1", "table2"), required=True)
    conv.add_argument("--n-list", type=_int_list, dest="n_list")
    conv.add_argument("--stop-factor", type=float, default=0.002, dest="stop_factor")
    conv.add_argument("--workers", type=int, default=1)
    conv.add_argument("--out", default="out")
    conv.set_defaults(func=cmd_converge)

    proj = sub.add_parser("project-test", help="projection convergence rates")
    proj.add_argument("--n-list", type=_int_list, dest="n_list")
    proj.set_defaults(func=cmd_project_test)

    chk = sub.add_parser("check-operators", help="operator sanity checks")
    chk.add_argument("--elements", type=int, default=64)
    chk.set_defaults(func=cmd_check_operators)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, ValueError) as exc:
        parser.error(str(exc))
    except (IterationLimitExceeded, NonFiniteState) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
