import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bo_galerkin.harness import (
    ConvergenceReport,
    emit_report,
    read_report_csv,
    relative_l2_error,
    run_periodic_wave_study,
    semidiscrete_residual,
)
from bo_galerkin.mesh_basis import UniformPeriodicMesh, interpolate

GOLDEN = Path(__file__).parent / "golden" / "table2.csv"


def _field():
    mesh = UniformPeriodicMesh(-15, 15, 32)
    return mesh, interpolate(np.cos, lambda x: -np.sin(x), mesh)


def test_relative_error_trivial():
    mesh, f = _field()
    grid = mesh.sample_grid()
    assert relative_l2_error(f, f, grid) == 0.0
    assert relative_l2_error(lambda x: 1.1 * f(x), f, grid) == pytest.approx(0.1, abs=1e-12)
    with pytest.raises(ValueError):
        relative_l2_error(f, np.zeros_like, grid)


def test_relative_error_is_trapezoid():
    mesh, f = _field()
    grid = np.linspace(-15, 15, 7)
    ex = lambda x: np.cos(x) + 2  # noqa: E731
    d = f(grid) - ex(grid)
    h = grid[1] - grid[0]
    trap = lambda v: h * (np.sum(v) - 0.5 * (v[0] + v[-1]))  # noqa: E731
    assert relative_l2_error(f, ex, grid) == pytest.approx(
        math.sqrt(trap(d * d) / trap(ex(grid) ** 2)), rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(errs=st.lists(st.floats(1e-8, 1.0), min_size=1, max_size=6))
def test_rate_identity(errs):
    ns = [16 * 2**i for i in range(len(errs))]
    rep = ConvergenceReport.from_errors("x", 1.0, ns, errs)
    for a, b in zip(rep.rows[:-1], rep.rows[1:]):
        assert abs(a.rate - math.log2(a.E / b.E)) <= 1e-12
    assert rep.rows[-1].rate is None


def test_emit_report(tmp_path):
    rep = ConvergenceReport.from_errors("x", 2.0, [8, 16], [0.1, 0.025], {"k": 1})
    path = emit_report(rep, tmp_path / "x_16.csv")
    assert path.read_text() == "N,E,rate\n8,0.10000000,2.00\n16,0.02500000,\n"
    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta == {"experiment": "x", "time": 2.0, "k": 1}
    empty = emit_report(ConvergenceReport("e", 0.0), tmp_path / "e.csv")
    assert empty.read_text() == "N,E,rate\n"


def test_study_requires_doubling():
    with pytest.raises(ValueError):
        run_periodic_wave_study([16, 48])


def test_table2_golden(tmp_path):
    rep = run_periodic_wave_study([16, 32, 64, 128])
    out = emit_report(rep, tmp_path / "table2.csv")
    got, ref = read_report_csv(out), read_report_csv(GOLDEN)
    assert [r[0] for r in got] == [r[0] for r in ref]
    for (_, e, rate), (_, e_ref, rate_ref) in zip(got, ref):
        assert e == pytest.approx(e_ref, rel=1e-6)
        assert rate == rate_ref
    meta = json.loads(out.with_suffix(".json").read_text())
    assert [r["t_reached"] for r in meta["runs"]] == [480.0] * 4


def test_parallel_matches_serial():
    a = run_periodic_wave_study([16, 32], t_target=20.0)
    b = run_periodic_wave_study([16, 32], t_target=20.0, workers=2)
    assert [r.E for r in a.rows] == [r.E for r in b.rows]


def test_semidiscrete_residual_decays():
    res = [semidiscrete_residual(n) for n in (16, 32, 64)]
    rates = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(rates >= 2.0)
