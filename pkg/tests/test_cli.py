import csv
import io
import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from splinebounds.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_figure1_digits(capsys):
    code, out, _ = run(capsys, "constants", "--figure", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    top = [r for r in rows if int(r["k"]) == int(r["p"]) - 1]
    assert len(top) == 9
    assert all(r["value"] == "0.03225153443319949" for r in top)


def test_figure_to_file(tmp_path, capsys):
    out = tmp_path / "fig4.csv"
    code, stdout, _ = run(capsys, "constants", "--figure", "4", "--out", str(out))
    assert code == 0 and stdout == ""
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert rows
    row = [r for r in rows if (r["p"], r["r"]) == ("10", "11")][0]
    assert abs(float(row["value"]) - 0.17) <= 0.01


def test_figure_output_is_deterministic(capsys):
    a = run(capsys, "constants", "--figure", "3")[1]
    b = run(capsys, "constants", "--figure", "3")[1]
    assert a == b


def test_bound_argmin_polynomial(capsys):
    code, out, _ = run(capsys, "bound", "--p", "10", "--r", "11", "--h", "0.2", "--length", "1")
    assert code == 0
    data = json.loads(out)
    assert data["argmin"] == "polynomial"
    assert data["minimum"] == min(data["candidates"].values())


def test_bound_kinds(capsys):
    for extra in (["--kind", "max_smooth", "--r", "2"], ["--kind", "ritz", "--q", "1", "--ell", "1", "--r", "3"],
                  ["--kind", "q", "--r", "2"], ["--kind", "reduced", "--parity", "odd"]):
        code, out, _ = run(capsys, "bound", "--p", "3", "--h", "0.1", *extra)
        assert code == 0
        assert json.loads(out)["minimum"] > 0


def test_bound_precondition_error_exits_2(capsys):
    code, _, err = run(capsys, "bound", "--p", "1", "--r", "4", "--h", "0.1")
    assert code == 2 and "error" in err


def test_opnorm_poincare(capsys):
    code, out, _ = run(capsys, "opnorm", "--p", "0", "--k", "-1", "--N", "0", "--r", "1", "--grid", "400")
    assert code == 0
    data = json.loads(out)
    assert abs(data["value"] - 1 / math.pi) <= 1e-3
    assert data["value"] <= data["bound"] * (1 + 1e-4)


def test_opnorm_resolution_error(capsys):
    code, _, _ = run(capsys, "opnorm", "--p", "1", "--k", "0", "--N", "2", "--r", "1", "--grid", "50")
    assert code == 2


def test_usage_errors_exit_2(capsys):
    for argv in (["frobnicate"], ["constants", "--figure", "7"], ["bound", "--h", "0.1"], []):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
    capsys.readouterr()


def write(tmp_path, cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_project_pass_writes_csv(tmp_path, capsys):
    cfg = {"target": {"id": "sin"}, "projector": "ritz:1", "degrees": [2, 3], "smoothness": "max",
           "r": [2], "ell": [0, 1], "schedule": [4, 8]}
    out = tmp_path / "report.csv"
    code, _, err = run(capsys, "project", "--config", write(tmp_path, cfg), "--out", str(out))
    assert code == 0
    assert "0 violations" in err
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 8 and all(r["status"] == "ok" for r in rows)
    assert all(0 < float(r["effectivity"]) <= 1 for r in rows)


def test_project_is_byte_identical(tmp_path, capsys):
    cfg = {"target": {"id": "exp"}, "projector": "l2", "degrees": [2], "schedule": [2, 4]}
    path = write(tmp_path, cfg)
    a = run(capsys, "project", "--config", path)[1]
    b = run(capsys, "project", "--config", path)[1]
    assert a == b and a.startswith("p,k,q,ell,r,N,h,error,bound,effectivity,order")


def test_convergence_violation_exits_1(tmp_path, capsys):
    cfg = {"target": {"id": "sin", "params": {"omega": 40.0}}, "projector": "l2", "degrees": [1],
           "smoothness": "max", "r": [2], "schedule": [1, 2, 4, 8]}
    code, out, _ = run(capsys, "convergence", "--config", write(tmp_path, cfg))
    assert code == 1
    assert "violation:order" in out


def test_bad_config_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "project", "--config", write(tmp_path, {"projector": "l2"}))
    assert code == 2 and "invalid config" in err
    code, _, _ = run(capsys, "project", "--config", str(tmp_path / "missing.json"))
    assert code == 2


@pytest.mark.parametrize("config", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_pass(config, tmp_path, capsys):
    code, _, err = run(capsys, "project", "--config", str(CONFIGS / config), "--out", str(tmp_path / "r.csv"))
    assert code == 0, err


@pytest.mark.skipif(shutil.which("splinebounds") is None, reason="console script not installed")
def test_console_script_exit_codes():
    ok = subprocess.run(["splinebounds", "constants", "--figure", "2"], capture_output=True, text=True)
    assert ok.returncode == 0 and ok.stdout.startswith("p,k,value")
    bad = subprocess.run(["splinebounds", "--nope"], capture_output=True, text=True)
    assert bad.returncode == 2 and "usage" in bad.stderr


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "splinebounds.cli", "bound", "--p", "2", "--h", "0.5"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "argmin" in res.stdout
