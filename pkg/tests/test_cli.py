import json
import subprocess
import sys

import pytest

from kvnlab.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from kvnlab.scenarios import DEFAULT_CONFIGS


def _cfg(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_passing_config_writes_outputs(tmp_path, capsys):
    path = _cfg(tmp_path, DEFAULT_CONFIGS["free_particle"])
    assert main(["run", "--config", path, "--out", str(tmp_path / "out")]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("[PASS] free_particle")
    data = json.loads((tmp_path / "out" / "report.json").read_text())
    assert data["passed"] and all("tolerance" in v for v in data["verdicts"])
    assert (tmp_path / "out" / "series.csv").read_text().startswith("t,exp_x1,exp_p2")


def test_failing_verdict_sets_exit_one(tmp_path):
    # an unmeetable norm tolerance forces a FAIL verdict
    text = DEFAULT_CONFIGS["free_particle"] + "tol.norm = 1e-300\n"
    assert main(["run", "--config", _cfg(tmp_path, text)]) == EXIT_FAIL


def test_config_errors_exit_two(tmp_path, capsys):
    path = _cfg(tmp_path, "scenario = no_entanglement\nphys.lamda = 1\n")
    assert main(["run", "--config", path]) == EXIT_USAGE
    assert "line 2: unknown key 'phys.lamda'" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == EXIT_USAGE
    wrap = DEFAULT_CONFIGS["free_particle"].replace("time.t_max = 1.5", "time.t_max = 50")
    assert main(["run", "--config", _cfg(tmp_path, wrap, "w.cfg")]) == EXIT_USAGE
    assert main(["run", "--scenario", "harmonic", "--jobs", "0"]) == EXIT_USAGE


def test_argparse_usage_error_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--bogus"])
    assert exc.value.code == 2


def test_tolerance_scale_is_recorded(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("KVNLAB_TOL_SCALE", "2")
    path = _cfg(tmp_path, DEFAULT_CONFIGS["free_particle"])
    assert main(["run", "--config", path, "--out", str(tmp_path / "o")]) == EXIT_OK
    assert "KVNLAB_TOL_SCALE=2" in capsys.readouterr().out
    data = json.loads((tmp_path / "o" / "report.json").read_text())
    assert data["provenance"]["tol_scale"] == 2.0
    monkeypatch.setenv("KVNLAB_TOL_SCALE", "zero")
    assert main(["run", "--config", path]) == EXIT_USAGE


def test_compare_oracle(tmp_path, capsys):
    path = _cfg(tmp_path, DEFAULT_CONFIGS["entangling"])
    assert main(["compare-oracle", "--config", path]) == EXIT_OK
    assert "PASS  entangling: max 1-F" in capsys.readouterr().out


def test_compare_oracle_rejects_large_grids(tmp_path, capsys):
    text = DEFAULT_CONFIGS["free_particle"].replace("grid.n2 = 64", "grid.n2 = 128")
    assert main(["compare-oracle", "--config", _cfg(tmp_path, text)]) == EXIT_USAGE
    assert "kvnlab:" in capsys.readouterr().err


def test_verify_algebra_prints_exponent(capsys):
    assert main(["verify-algebra", "--trials", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "third-factor exponent: lam t^2 / (2 m)" in out
    assert "FAIL" not in out


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == EXIT_OK
    assert capsys.readouterr().out.split() == list(DEFAULT_CONFIGS)
    assert main(["list-scenarios", "-v"]) == EXIT_OK
    assert "tol.negativity" in capsys.readouterr().out


def test_default_suite_with_jobs(tmp_path, capsys):
    out = tmp_path / "suite"
    code = main(["run", "--out", str(out), "--jobs", "2"])
    text = capsys.readouterr().out
    for name in DEFAULT_CONFIGS:
        assert (out / name / "series.csv").exists()
        assert f"] {name} (" in text
    # exit status follows the verdicts: 1 as long as any scenario fails
    assert code == (EXIT_FAIL if "[FAIL]" in text else EXIT_OK)


def test_module_entry_point_runs_in_subprocess():
    proc = subprocess.run([sys.executable, "-m", "kvnlab", "run", "--scenario", "harmonic"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and "[PASS] harmonic" in proc.stdout
