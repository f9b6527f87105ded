from __future__ import annotations

import json

import numpy as np
import pytest
from click.testing import CliRunner
from numpy.testing import assert_allclose

from fractel import FDConfig, ProblemSpec, ScalarField, TelegraphParams, fd_solve
from fractel.cli import EXIT_CONFIG, EXIT_FAILED_CHECK, EXIT_NUMERIC, main, manifest_argv


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, env=None):
    return runner.invoke(main, [str(a) for a in args], env=env, catch_exceptions=False)


# gamma


def test_gamma_point_is_heat_kernel(runner):
    res = run(runner, "gamma", "--alpha", 1, "--b", 0, "--c", 0, "--x", 0, "--y", 1)
    assert res.exit_code == 0
    assert float(res.output) == pytest.approx(0.28209479177387814, rel=1e-10)
    assert res.output.strip() == f"{float(res.output):.17g}"


def test_gamma_rejects_nonpositive_time(runner):
    res = run(runner, "gamma", "--alpha", 1, "--x", 0, "--y", 0)
    assert res.exit_code == EXIT_CONFIG
    assert "y > 0" in res.output


def test_gamma_grid_files_are_reproducible(runner, tmp_path):
    args = ["gamma", "--alpha", 0.7, "--b", 0.2, "--c", 0.1, "--x-range", -1, 1, "--nx", 5,
            "--y-range", 0.2, 1, "--ny", 3]
    a = run(runner, *args, "--out", tmp_path / "a")
    b = run(runner, *args, "--out", tmp_path / "b")
    assert a.exit_code == b.exit_code == 0
    text = (tmp_path / "a.csv").read_bytes()
    assert text == (tmp_path / "b.csv").read_bytes()
    assert text.startswith(b"x,y,u\n") and b"\r" not in text
    assert len(text.splitlines()) == 1 + 15
    doc = json.loads((tmp_path / "a.json").read_text())
    man = doc["manifest"]
    assert man["schema"] == 1 and man["command"] == "gamma"
    assert man["args"]["alpha"] == 0.7 and man["tolerances"]["rel_tol"] == 1e-10
    assert "version" in man and man["wall_time"] >= 0


def test_gamma_to_stdout_matches_file(runner, tmp_path):
    args = ["gamma", "--alpha", 0.7, "--x-range", 0, 1, "--nx", 3, "--y", 0.5]
    res = run(runner, *args)
    run(runner, *args, "--out", tmp_path / "g")
    assert res.output == (tmp_path / "g.csv").read_text()


def test_rerun_reproduces_output(runner, tmp_path):
    args = ["gamma", "--alpha", 1.3, "--b", 0.4, "--x-range", -1, 1, "--nx", 3, "--y-range", 0.3, 0.9, "--ny", 2]
    run(runner, *args, "--out", tmp_path / "first")
    res = run(runner, "rerun", tmp_path / "first.json", "--out", tmp_path / "second")
    assert res.exit_code == 0
    assert (tmp_path / "first.csv").read_bytes() == (tmp_path / "second.csv").read_bytes()


def test_manifest_argv_round_trip():
    argv = manifest_argv({"command": "gamma", "args": {"alpha": 0.5, "x_range": [0.0, 1.0], "out": None, "nx": 3}})
    assert argv == ["gamma", "--alpha", "0.5", "--nx", "3", "--x-range", "0.0", "1.0"]


def test_invalid_thread_setting(runner):
    for bad in ("zero", "0", "-2"):
        res = run(runner, "gamma", "--alpha", 1, "--x-range", 0, 1, "--y", 1, env={"FRACTEL_THREADS": bad})
        assert res.exit_code == EXIT_CONFIG
        assert "FRACTEL_THREADS" in res.output


# special functions and Green functions


def test_specfun_values(runner):
    res = run(runner, "specfun", "wright", "--beta", 0.5, "--mu", 0.5, "--z", 0, "--z", -1)
    assert [float(v) for v in res.output.split()] == pytest.approx([0.5641895835477563, 0.43939128946772243])
    res = run(runner, "specfun", "f01", "--nu", 1, "--z", 1)
    assert float(res.output) == pytest.approx(2.2795853023360673, rel=1e-14)
    res = run(runner, "specfun", "rgamma", "--x", -3, "--x", 3)
    assert [float(v) for v in res.output.split()] == [0.0, 0.5]


def test_numerical_failure_exit_code(runner):
    res = run(runner, "specfun", "wright", "--beta", 0.25, "--mu", 0.5, "--z", 400)
    assert res.exit_code == EXIT_NUMERIC


def test_configuration_exit_codes(runner):
    assert run(runner, "specfun", "wright", "--beta", 1.5, "--mu", 0, "--z", 0).exit_code == EXIT_CONFIG
    assert run(runner, "gamma", "--alpha", 2.5, "--x", 0, "--y", 1).exit_code == EXIT_CONFIG
    assert run(runner, "gamma", "--alpha", 1, "--x", 0, "--x-range", 0, 1, "--y", 1).exit_code == EXIT_CONFIG
    assert run(runner, "green", "--alpha", 1, "--kind", "rect", "--x", 0.5, "--y", 1, "--t", 0.2).exit_code == EXIT_CONFIG


def test_green_dirichlet_wall_value(runner):
    res = run(runner, "green", "--alpha", 0.8, "--b", 0.5, "--c", 0.25, "--kind", "half", "--i", 0,
              "--x", 0, "--y", 1, "--t", 0.5, "--s", 0.2)
    assert res.exit_code == 0
    assert float(res.output) == 0.0


# solve


def _solve(runner, *extra):
    return run(runner, "solve", *extra)


def test_constant_cauchy_data_give_ones(runner):
    res = _solve(runner, "--alpha", 0.6, "--b", 0.3, "--variant", "cauchy", "--tau1", "1",
                 "--x-range", -1, 1, "--nx", 3, "--y-range", 0.2, 0.8, "--ny", 2)
    assert res.exit_code == 0
    u = np.array([float(r.split(",")[2]) for r in res.output.splitlines()[1:]])
    assert u.size == 6 and np.max(np.abs(u - 1.0)) <= 1e-6


def test_zero_rectangle_data_give_zero_field(runner):
    res = _solve(runner, "--alpha", 0.6, "--variant", "rect", "--a1", 0, "--a2", 1, "--tau1", "0",
                 "--phi1", "0", "--phi2", "0", "--x-range", 0, 1, "--nx", 3, "--y-range", 0.5, 1, "--ny", 2)
    assert res.exit_code == 0
    assert all(float(r.split(",")[2]) == 0.0 for r in res.output.splitlines()[1:])


def test_gaussian_cauchy_field_matches_marching_oracle(runner, tmp_path):
    res = _solve(runner, "--alpha", 0.8, "--b", 0.5, "--c", 0.25, "--variant", "cauchy", "--tau1", "exp(-x^2)",
                 "--x-range", -1.6, 1.6, "--nx", 3, "--y-range", 0.5, 1, "--ny", 2, "--out", tmp_path / "u")
    assert res.exit_code == 0
    fld = ScalarField.from_csv((tmp_path / "u.csv").read_text())
    p = TelegraphParams(0.8, 0.5, 0.25)
    fd = fd_solve(p, ProblemSpec("cauchy", lambda x: np.exp(-(x**2))), FDConfig(201, 200, window=(-8.0, 8.0)))
    ix = [int(np.argmin(np.abs(fd.grid.x - v))) for v in fld.grid.x]
    iy = [int(np.argmin(np.abs(fd.grid.y - v))) for v in fld.grid.y]
    ref = fd.values[np.ix_(ix, iy)]
    assert np.max(np.abs(fld.values - ref)) <= 0.05 * np.max(np.abs(ref))


def test_sampled_data_file(runner, tmp_path):
    data = tmp_path / "tau.csv"
    data.write_text("x,u\n-5,1\n5,1\n")
    res = _solve(runner, "--alpha", 0.6, "--variant", "cauchy", "--tau1", f"@{data}",
                 "--x-range", -1, 1, "--nx", 2, "--y-range", 0.5, 0.5, "--ny", 1, "--out", tmp_path / "u")
    assert res.exit_code == 0
    fld = ScalarField.from_csv((tmp_path / "u.csv").read_text())
    assert_allclose(fld.values, 1.0, atol=1e-6)
    man = json.loads((tmp_path / "u.json").read_text())["manifest"]
    assert len(man["inputs"]["tau1"]["sha256"]) == 64


def test_parse_errors_show_a_caret(runner):
    res = _solve(runner, "--alpha", 0.6, "--variant", "cauchy", "--tau1", "sin(",
                 "--x-range", -1, 1, "--y-range", 0.5, 1)
    assert res.exit_code == EXIT_CONFIG
    assert "offset 4" in res.output
    assert "sin(\n    ^" in res.output


def test_missing_slope_data_is_a_config_error(runner):
    res = _solve(runner, "--alpha", 1.5, "--variant", "cauchy", "--tau1", "1",
                 "--x-range", -1, 1, "--y-range", 0.5, 1)
    assert res.exit_code == EXIT_CONFIG


def test_unknown_variable_in_data(runner):
    res = _solve(runner, "--alpha", 0.6, "--variant", "cauchy", "--tau1", "y",
                 "--x-range", -1, 1, "--y-range", 0.5, 1)
    assert res.exit_code == EXIT_CONFIG


def test_evaluation_error_in_data(runner):
    res = _solve(runner, "--alpha", 0.6, "--variant", "cauchy", "--tau1", "1/x",
                 "--x-range", -1, 1, "--nx", 3, "--y-range", 0.5, 1)
    assert res.exit_code == EXIT_CONFIG


# verify


@pytest.mark.parametrize("scenario", ["heat-kernel", "special-functions", "mittag-leffler"])
def test_verify_scenarios_pass(runner, tmp_path, scenario):
    res = run(runner, "verify", scenario, "--report", tmp_path / "r.json")
    assert res.exit_code == 0
    assert res.output.rstrip().endswith("overall: PASS")
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["passed"] and rep["schema"] == 1


def test_verify_constant_solution(runner):
    res = run(runner, "verify", "constant-solution")
    assert res.exit_code == 0
    assert "FAIL" not in res.output


def test_verify_from_scenario_file(runner, tmp_path):
    doc = tmp_path / "scenario.json"
    doc.write_text(json.dumps({"scenario": "rect-vs-fd", "levels": 1}))
    res = run(runner, "verify", doc, "--report", tmp_path / "r.json")
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["levels"] == 1
    assert res.exit_code == (0 if rep["passed"] else EXIT_FAILED_CHECK)


def test_verify_unknown_scenario(runner):
    assert run(runner, "verify", "no-such-check").exit_code == EXIT_CONFIG


def test_failed_check_exit_code(runner, monkeypatch):
    from fractel import verify
    from fractel.verify import Check

    monkeypatch.setitem(verify.SCENARIOS, "always-fails", lambda levels: [Check("bad", False)])
    res = run(runner, "verify", "always-fails")
    assert res.exit_code == EXIT_FAILED_CHECK
    assert "[FAIL]" in res.output
