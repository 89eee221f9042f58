import csv
import io
import json
import subprocess
import sys

import pytest

from nls_stability import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_profile_json(capsys):
    code, out, _ = run(capsys, "profile", "--p", "3", "--gamma", "1", "--omega", "-1", "--n-points", "401")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == cli.SCHEMA_VERSION
    assert doc["b_omega"] == pytest.approx(0.5493061443340549, rel=1e-14)
    assert out.endswith("\n")


def test_deterministic_output(capsys):
    argv = ("critical-omega", "--p", "4", "--gamma", "1", "--n-points", "1001")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_config_errors_exit_2(capsys):
    code, _, err = run(capsys, "profile", "--p", "2", "--gamma", "1", "--omega", "-0.2")
    assert code == cli.EXIT_CONFIG
    assert "Omega" in err
    code, _, _ = run(capsys, "system", "--gammas", "0.5,2")
    assert code == cli.EXIT_CONFIG
    code, _, _ = run(capsys, "simulate", "--scheme", "strang-splitting", "--t-end", "0.1")
    assert code == cli.EXIT_CONFIG
    code, _, _ = run(capsys, "profile", "--bogus")
    assert code == cli.EXIT_CONFIG


def test_dcurve_csv_flags_sign_change(capsys):
    code, out, _ = run(capsys, "dcurve", "--p", "4", "--gamma", "1", "--omega-range", "-8:-0.26:12",
                       "--n-points", "1001", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 12
    assert sum(r["sign_change"] == "true" for r in rows) == 1


def test_dcurve_parallel_matches_serial(capsys, tmp_path):
    base = ("dcurve", "--p", "3", "--gamma", "1", "--omega-range", "-4:-1:4", "--n-points", "801")
    code, serial, _ = run(capsys, *base, "--jobs", "1", "--format", "csv")
    assert code == 0
    code, _, _ = run(capsys, *base, "--jobs", "2", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "dcurve.csv").read_bytes().decode() == serial
    assert json.loads((tmp_path / "dcurve.json").read_text())["command"] == "dcurve"


def test_dcurve_partial_failure_exit_4(capsys):
    # the sweep crosses the edge of the admissible window: those rows fail
    code, out, _ = run(capsys, "dcurve", "--p", "3", "--gamma", "1", "--omega-range", "-2:0:3",
                       "--n-points", "401")
    assert code == cli.EXIT_PARTIAL
    doc = json.loads(out)
    assert [r["omega"] for r in doc["failed_rows"]] == [0.0]


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("p = 3\ngamma = 1\n[grid]\nn_points = 301\nomega = -1\n")
    code, out, _ = run(capsys, "profile", "--config", str(cfg), "--omega", "-1.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["omega"] == -1.5 and doc["n_points"] == 301


def test_conditions_pipeline(capsys):
    code, out, _ = run(capsys, "conditions", "--pipeline", "negative-slope", "--n-points", "1001")
    assert code == 0
    assert json.loads(out)["all_pass"]


def test_simulate_stops_at_exit(capsys):
    code, out, _ = run(capsys, "simulate", "--setting", "negative-slope", "--n-points", "1001",
                       "--t-end", "5", "--dt", "2e-3")
    assert code == 0
    doc = json.loads(out)
    assert doc["exit_time"] is not None and doc["t_final"] == pytest.approx(doc["exit_time"])


def test_linear_demo(capsys):
    code, out, _ = run(capsys, "linear-demo", "--trials", "5", "--t-end", "10")
    assert code == 0


def test_verify_all_subset(capsys):
    code, out, err = run(capsys, "verify-all", "--only", "1,2")
    assert code == 0
    assert err.count("PASS") == 2


def test_env_jobs(monkeypatch):
    monkeypatch.setenv("NLS_STABILITY_JOBS", "3")
    assert cli._default_jobs() == 3
    monkeypatch.setenv("NLS_STABILITY_JOBS", "x")
    with pytest.raises(cli.ConfigError):
        cli._default_jobs()


def test_json_serialisation_rules():
    text = cli.to_json({"b": float("nan"), "a": 0.1, "z": 1 + 2j})
    doc = json.loads(text)
    assert doc["b"] is None and doc["z"] == {"re": 1, "im": 2}
    assert text.index('"a"') < text.index('"b"')
    assert "0.10000000000000001" in text


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "nls_stability.cli", "verify-all", "--only", "2"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "PASS [ 2]" in out.stderr
