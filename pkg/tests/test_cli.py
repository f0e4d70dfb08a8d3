import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from monotoda.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(tmp_path, text, command, name="cfg.ini"):
    cfg = tmp_path / name
    cfg.write_text(text)
    out = tmp_path / "out"
    code = main([command, "--config", str(cfg), "--out", str(out)])
    path = out / f"{command}.json"
    report = json.loads(path.read_text()) if path.exists() else None
    return code, report


def test_simulate_equilibrium(tmp_path):
    code, rep = run(tmp_path, (CONFIGS / "equilibrium.ini").read_text(), "simulate")
    assert code == 0
    assert rep["H_drift"] == 0 and rep["spectral_drift"] == 0 and rep["antihermiticity_drift"] == 0
    rows = list(csv.reader(open(tmp_path / "out" / "trajectory.csv")))
    assert rows[0][0] == "s" and len(rows) > 2


def test_simulate_random_n2(tmp_path):
    code, rep = run(tmp_path, (CONFIGS / "simulate_n2.ini").read_text(), "simulate")
    assert code == 0
    assert rep["H_drift"] < 1e-8 and rep["spectral_drift"] < 1e-8
    assert rep["antihermiticity_drift"] < 1e-8


def test_simulate_blowup_reports_s_star(tmp_path):
    code, rep = run(tmp_path, "[toda]\nn = 2\nq = 0.3, -0.3\np = 0, 0\ns1 = 1.9\n", "simulate")
    assert code == 3
    assert rep["blowup"] and abs(rep["s_star"] - 1.5702) < 1e-3
    assert rep["H_drift"] is None and "blow-up" in rep["error"]
    assert (tmp_path / "out" / "trajectory.csv").exists()


def test_malformed_config(tmp_path):
    code, _ = run(tmp_path, "[toda\nn = 2\n", "simulate")
    assert code == 2
    code, _ = run(tmp_path, "[toda]\nn = two\n", "simulate")
    assert code == 2
    code, _ = run(tmp_path, "[toda]\nn = 2\ntol = -1\n", "simulate")
    assert code == 2
    assert main(["simulate", "--config", str(tmp_path / "missing.ini")]) == 2
    assert main(["bogus", "--config", "x"]) == 2


def test_curve_n2_t_prime(tmp_path):
    code, rep = run(tmp_path, "[curve]\nn = 2\na = 3\nbeta = 1\n", "curve")
    assert code == 0
    assert abs(rep["normal_form"]["t_prime"] - 6 / np.sqrt(5)) < 1e-12
    assert rep["reality"]["ok"]


def test_curve_reducible(tmp_path, capsys):
    code, rep = run(tmp_path, "[curve]\nn = 2\nt = 2\nbeta = 1\n", "curve")
    assert code == 4
    assert "reducible" in rep["error"]
    assert "reducible" in capsys.readouterr().err


def test_curve_genus_ledger_n3(tmp_path):
    code, rep = run(tmp_path, (CONFIGS / "curve_n3.ini").read_text(), "curve")
    assert code == 0
    assert rep["genus"]["g_hat"] == 4 and rep["genus"]["g"] == 2


def test_curve_reality_violation(tmp_path):
    grid = np.zeros((3, 5))
    grid[2, 0] = 1
    grid[0, 0], grid[0, 4] = -1, 1          # zeta^4 - 1 is not real
    (tmp_path / "c.json").write_text(json.dumps(
        {"coeffs": {"re": grid.tolist(), "im": np.zeros_like(grid).tolist()}}))
    code, rep = run(tmp_path, "[curve]\nfile = c.json\n", "curve")
    assert code == 3 and not rep["reality"]["ok"]


def test_curve_file_missing(tmp_path):
    code, _ = run(tmp_path, "[curve]\nfile = nowhere.json\n", "curve")
    assert code == 2


def test_periods_n3(tmp_path):
    code, rep = run(tmp_path, (CONFIGS / "periods_n3.ini").read_text(), "periods")
    assert code == 0
    assert rep["symmetry_defect"] < 1e-10 and rep["min_im_eig"] > 0 and rep["basis"] == "cyclic"


def test_es_n2(tmp_path):
    code, rep = run(tmp_path, (CONFIGS / "es_n2.ini").read_text(), "es")
    assert code == 0
    assert rep["converged"] and rep["norm"] < 1e-9
    assert rep["refined_residual"] < 1e-9
    assert rep["half_period_defect"] < 1e-7


def test_es_from_t_prime_3_is_infeasible(tmp_path):
    # t' = 3 means t = 6/sqrt 5 > 2, where no real solution with ints (1, 0) exists
    code, rep = run(tmp_path, "[curve]\nn = 2\nt = 2.6832815729997477\nbeta = 1\n"
                              "[es]\nints = 1, 0\nmax_iter = 15\n", "es")
    assert code == 5 and rep["infeasible"]


def test_es_zero_ints(tmp_path):
    code, rep = run(tmp_path, "[curve]\nn = 2\nt = 0\nbeta = 1\n[es]\nints = 0, 0\nmax_iter = 10\n", "es")
    assert code == 5 and rep["infeasible"] and "error" in rep


def test_es_missing_init(tmp_path):
    code, _ = run(tmp_path, "[es]\nints = 1, 0\n", "es")
    assert code == 2
    code, _ = run(tmp_path, "[curve]\nn = 2\nt = 0\n[es]\nints = 1, 0, 0\n", "es")
    assert code == 2


def test_theta_pipeline_n2(tmp_path):
    code, rep = run(tmp_path, (CONFIGS / "theta_n2.ini").read_text(), "theta")
    assert code == 0
    fa = rep["fay_accola"]
    assert fa["deviation"] < 1e-9 and fa["c0_defect"] < 1e-9
    lams = sorted(z["lambda"] for z in rep["h3"]["zeros"])
    assert lams[0] == 0 and lams[-1] == 2
    assert max(rep["h3"]["endpoints"]) < 1e-6
    rows = list(csv.reader(open(tmp_path / "out" / "h3_scan.csv")))
    assert len(rows) == 401


def test_theta_indefinite_tau(tmp_path):
    code, _ = run(tmp_path, "[theta]\nmode = fay_accola\ntau = 0.5-1j\n", "theta")
    assert code == 6


def test_theta_grid_zero(tmp_path):
    code, _ = run(tmp_path, "[curve]\nn = 2\nt = 0\n[theta]\ngrid = 0\n", "theta")
    assert code == 2


def test_deterministic_json(tmp_path):
    text = (CONFIGS / "simulate_n2.ini").read_text()
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        (d / "c.ini").write_text(text)
        assert main(["simulate", "--config", str(d / "c.ini"), "--out", str(d / "o")]) == 0
        outs.append((d / "o" / "simulate.json").read_bytes())
    assert outs[0] == outs[1]
    assert b'"H0": ' in outs[0]


def test_console_script(tmp_path):
    out = tmp_path / "o"
    r = subprocess.run([sys.executable, "-m", "monotoda.cli", "curve", "--config",
                        str(CONFIGS / "curve_n2.ini"), "--out", str(out)], capture_output=True)
    assert r.returncode == 0 and (out / "curve.json").exists()
