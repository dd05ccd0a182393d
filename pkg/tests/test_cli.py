import json

import numpy as np
import pytest

from bo_galerkin.cli import main
from bo_galerkin.exact_solutions import periodic_wave
from bo_galerkin.mesh_basis import UniformPeriodicMesh
from bo_galerkin.projection import project


def test_run_t_end_zero_is_projection(tmp_path):
    assert main(["run", "--problem", "periodic-wave", "--elements", "64", "--t-end", "0",
                 "--out", str(tmp_path)]) == 0
    data = np.loadtxt(tmp_path / "periodic_wave_64.csv", delimiter=",", skiprows=1)
    mesh = UniformPeriodicMesh(-15, 15, 64)
    p = project(lambda x: periodic_wave(x, 0.0), mesh)
    np.testing.assert_allclose(data[:, 1], p(data[:, 0]), atol=1e-11)
    side = json.loads((tmp_path / "periodic_wave_64.json").read_text())
    assert side["N"] == 64 and side["steps"] == 0


def test_config_round_trip(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--elements", "16", "--snapshots", "2,4", "--weight", "unit",
                 "--out", str(a)]) == 0
    cfg = json.loads((a / "periodic_wave_16_config.json").read_text())
    replay = {k: v for k, v in cfg.items() if k not in ("dt", "num_steps")}
    replay["out"] = str(b)
    (tmp_path / "c.json").write_text(json.dumps(replay))
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 0
    for name in ("periodic_wave_16_t2.csv", "periodic_wave_16_t4.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_flags_override_config(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"elements": 8, "t_end": 1.0}))
    assert main(["run", "--config", str(tmp_path / "c.json"), "--elements", "16",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "periodic_wave_16.csv").exists()


def test_custom_initial_and_dump(tmp_path):
    assert main(["run", "--problem", "custom-initial", "--domain=-10,10",
                 "--initial", "0.3*exp(-x**2)", "--elements", "16", "--t-end", "1",
                 "--dump-matrices", "--out", str(tmp_path)]) == 0
    m = np.loadtxt(tmp_path / "custom_initial_16_mass.csv", delimiter=",", skiprows=1)
    assert m.shape[1] == 3 and m[:, :2].max() == 31


@pytest.mark.parametrize("argv", [
    ["run", "--weight", "bogus"],
    ["run", "--dt-mode", "theory:x"],
    ["run", "--problem", "custom-initial"],
    ["run", "--elements", "two"],
    ["converge", "--preset", "table3"],
    ["nope"],
])
def test_bad_flags_exit_2(argv, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(argv + ["--out", str(tmp_path)] if argv[0] == "run" else argv)
    assert exc.value.code == 2


def test_solver_failure_exit_1(tmp_path, capsys):
    assert main(["run", "--elements", "16", "--t-end", "5", "--max-iters", "1",
                 "--out", str(tmp_path)]) == 1
    assert "solver failure" in capsys.readouterr().err


def test_check_operators(capsys):
    assert main(["check-operators", "--elements", "64"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 7 and "FAIL" not in out


def test_check_operators_violation(monkeypatch, capsys):
    from bo_galerkin import harness

    monkeypatch.setattr(harness, "operator_diagnostics",
                        lambda n: [("fake", 1.0, 0.5, False)])
    assert main(["check-operators"]) == 3


def test_project_test(capsys):
    assert main(["project-test"]) == 0
    assert capsys.readouterr().out.startswith("N,L2,rate_L2")


def test_converge_table2(tmp_path, capsys):
    assert main(["converge", "--preset", "table2", "--n-list", "16,32,64,128",
                 "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "table2.csv").read_text().splitlines()
    assert lines[0] == "N,E,rate" and len(lines) == 5
    assert lines[-1].endswith(",")
