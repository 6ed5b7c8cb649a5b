import json
import subprocess
import sys

import numpy as np
import pytest

from ctrw_heat.cli import run
from ctrw_heat.fieldio import read_field


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_moments(capsys, tmp_path):
    code, out, _ = _run(capsys, "moments", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    assert summary["command"] == "moments" and summary["status"] == "ok"
    data = json.loads((tmp_path / "moments.json").read_text())
    assert data["mass"] == pytest.approx(1.0, abs=1e-8)
    assert data["mu"] + data["nu"] == pytest.approx(0.0, abs=1e-8)


def test_solve_writes_field(capsys, tmp_path):
    code, out, _ = _run(capsys, "solve", "--out", str(tmp_path), "--M", "128", "--T-alphas", "2",
                        "--datum", "cosine", "--csv", "--workers", "1")
    assert code == 0
    s = json.loads(out)
    assert s["mass_drift"] <= 1e-10
    u = read_field(tmp_path / "field")
    assert u.values.shape[1] == 128
    assert (tmp_path / "field.csv").exists() and (tmp_path / "report.json").exists()
    assert np.max(u.values) <= 1 + 1e-12


def test_heat(capsys, tmp_path):
    code, out, _ = _run(capsys, "heat", "--out", str(tmp_path), "--M", "64", "--T", "0.01")
    assert code == 0 and json.loads(out)["mass_drift"] <= 1e-12


def test_scaling_check(capsys, tmp_path):
    code, out, _ = _run(capsys, "scaling-check", "--out", str(tmp_path), "--M", "128",
                        "--r", "0.5", "--T-alphas", "1", "--datum", "cosine")
    assert code == 0, out
    assert json.loads(out)["discrepancy"] <= 5e-10


@pytest.mark.parametrize("argv", [
    ["solve", "--M", "16"],                       # kernel unresolved
    ["solve", "--datum", "no-such-datum"],
    ["moments", "--kernel-param", "oops"],
    ["weaklimit", "--r-list", "0.1,-1"],
])
def test_configuration_errors_exit_2(capsys, tmp_path, argv):
    code, out, err = _run(capsys, *argv, "--out", str(tmp_path))
    assert code == 2
    if err.strip().startswith("{"):
        rec = json.loads(err.strip().splitlines()[-1])
        assert rec["error"] in ("configuration", "invalid-parameter", "invalid-state")


def test_bad_config_file(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"gird": {}}')
    code, _, err = _run(capsys, "moments", "--config", str(p), "--out", str(tmp_path))
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"] == "configuration"


def test_unknown_command_and_help(capsys):
    assert run(["frobnicate"]) == 2
    assert run(["--help"]) == 0
    capsys.readouterr()


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ctrw_heat.cli", "moments", "--dim", "2",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["command"] == "moments"
