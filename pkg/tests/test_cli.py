import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qcu import qmat
from qcu.cli import run
from qcu.multictrl import resource_report
from qcu.optics import OptimizerOptions, optimize_cphase
from qcu.synth import CUParams, cu_to_zyz, synthesize_controlled_u
from qcu.tomo import reconstruct_ml, simulate_tomography


def call(capsys, *argv):
    status = run(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


@pytest.fixture
def identity_file(tmp_path):
    path = tmp_path / "identity.json"
    path.write_text(qmat.matrix_to_json(np.eye(2)))
    return path


def test_map_table_row(capsys):
    status, out, _ = call(capsys, "map", "--phi", "0.3927", "--theta", "1.5708", "--alpha", "0")
    assert status == 0
    d = json.loads(out)
    assert d["omega"] == pytest.approx(0.3927, abs=1e-4)
    assert d["gamma"] == pytest.approx(1.5708, abs=1e-4)
    assert d["delta"] == pytest.approx(-1.5708, abs=1e-4)


def test_map_is_thin_adapter(capsys):
    _, out, _ = call(capsys, "map", "--phi", "0.3", "--theta", "1.1", "--alpha", "-2")
    assert json.loads(out) == cu_to_zyz(CUParams(-2.0, 1.1, 0.3)).to_dict()


def test_degrees(capsys):
    _, rad, _ = call(capsys, "map", "--phi", str(math.pi / 2), "--theta", str(math.pi / 2),
                     "--alpha", str(math.pi / 2))
    _, deg, _ = call(capsys, "map", "--deg", "--phi", "90", "--theta", "90", "--alpha", "90")
    a, b = json.loads(rad), json.loads(deg)
    assert all(a[k] == pytest.approx(b[k], abs=1e-12) for k in a)


def test_inverse_map(capsys):
    status, out, _ = call(capsys, "inverse-map", "--omega", str(math.pi / 2), "--gamma", "0", "--delta", "0")
    assert status == 0
    d = json.loads(out)
    assert d["phi"] == pytest.approx(math.pi / 2) and d["alpha"] == pytest.approx(math.pi / 2)
    status, _, err = call(capsys, "inverse-map", "--omega", "1", "--gamma", "0", "--delta", "0",
                          "--global-phase", "0.5")
    assert status == 1 and "global_phase" in err


def test_decompose_identity(capsys, identity_file):
    status, out, _ = call(capsys, "decompose", "--unitary", f"@{identity_file}")
    assert status == 0
    assert json.loads(out) == {"gamma": 0.0, "omega": 0.0, "delta": 0.0, "global_phase": 0.0}


def test_assemble(capsys, tmp_path):
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    path = tmp_path / "h.json"
    path.write_text(qmat.matrix_to_json(h))
    _, out, _ = call(capsys, "assemble", "--unitary", f"@{path}")
    d = json.loads(out)
    plan = synthesize_controlled_u(h)
    assert d["cu"] == plan.cu.to_dict() and d["control_phase"] == plan.control_phase
    assert qmat.matrix_from_dict(d["gate"]).shape == (4, 4)


def test_optimize_matches_library(capsys):
    status, out, _ = call(capsys, "optimize", "--phi", "3.1416", "--restarts", "4", "--seed", "1")
    assert status == 0
    direct = optimize_cphase(3.1416, OptimizerOptions(restarts=4, seed=1)).to_dict()
    assert out.strip() == json.dumps(direct)
    assert json.loads(out)["p_succ"] == pytest.approx(0.111, abs=0.005)


def test_optimize_infeasible_exits_2(capsys, monkeypatch):
    from qcu.optics import search

    monkeypatch.setattr(search, "FEASIBILITY_TOL", 0.0)
    status, _, err = call(capsys, "optimize", "--phi", "1", "--restarts", "1")
    assert status == 2 and "numerical failure" in err


def test_curve_writes_csv(capsys, tmp_path):
    out_file = tmp_path / "curve.csv"
    status, out, err = call(capsys, "curve", "--phis", "0", "3.14159265", "--restarts", "2",
                            "--out", str(out_file))
    assert status == 0 and out == "" and err == ""
    lines = out_file.read_text().splitlines()
    assert lines[0] == "phi,p_succ,residual" and len(lines) == 3
    _, _, err = call(capsys, "curve", "--phis", "0", "--restarts", "1", "--pretty")
    assert err.startswith("min=")


def test_ncu(capsys):
    status, out, _ = call(capsys, "ncu", "--n", "3", "--theta", "2.356")
    d = json.loads(out)
    assert status == 0 and d["deviation"] < 1e-10 and d["leakage"] < 1e-12
    assert len(d["circuit"]["gates"]) == 5


def test_resources(capsys):
    _, out, _ = call(capsys, "resources", "--n", "2", "--phi", "1.5708", "--p-cphase", "0.090")
    assert json.loads(out) == resource_report(2, 1.5708, 1 / 9, 0.090).to_dict()


def test_tomo_matches_library(capsys, identity_file):
    status, out, _ = call(capsys, "tomo", "--unitary", f"@{identity_file}", "--shots", "500",
                          "--noise", "poisson", "--seed", "7")
    assert status == 0
    d = json.loads(out)
    t = simulate_tomography(np.eye(2), 500, "poisson", 7)
    assert d["tomogram"] == t.to_dict()
    assert d["choi"] == reconstruct_ml(t).to_dict()


def test_table_csv(capsys, monkeypatch):
    from qcu import tomo

    # avoid the optimizer: fixed success probabilities
    real = tomo.table_report
    monkeypatch.setattr(tomo, "table_report",
                        lambda rows, shots, noise, seed, **kw: real(rows, shots, noise, seed, p_succ=[0.5] * len(rows)))
    status, out, _ = call(capsys, "table", "--shots", "1000")
    lines = out.splitlines()
    assert status == 0 and lines[0] == "phi,theta,alpha,omega,gamma,delta,F_off,P_off,F_on,P_on,p_succ"
    assert len(lines) == 7


@pytest.mark.parametrize("payload, field", [
    ('{"rows": 2, "cols": 2, "re": [1, 0, 0, 1]}', "im"),
    ('{"rows": 2, "cols": 2, "re": [1, 0], "im": [0, 0, 0, 0]}', "re"),
])
def test_malformed_matrix_names_field(capsys, tmp_path, payload, field):
    path = tmp_path / "bad.json"
    path.write_text(payload)
    status, _, err = call(capsys, "decompose", "--unitary", f"@{path}")
    assert status == 1 and f"'{field}'" in err


@pytest.mark.parametrize("argv", [
    ["map", "--phi", "1"],
    ["map", "--phi", "1", "--theta", "0", "--alpha", "0", "--bogus", "2"],
    ["frobnicate"],
    [],
    ["decompose", "--unitary", "@/nonexistent/file.json"],
    ["tomo", "--unitary", '{"rows":2,"cols":2,"re":[1,0,0,1],"im":[0,0,0,0]}', "--noise", "gaussian"],
    ["ncu", "--n", "0", "--theta", "1"],
    ["decompose", "--unitary", '{"rows":2,"cols":2,"re":[2,0,0,1],"im":[0,0,0,0]}'],
])
def test_validation_errors_exit_1(capsys, argv):
    status, out, err = call(capsys, *argv)
    assert status == 1 and out == "" and err.startswith("qcu: error")


def test_console_script_entry_point(identity_file):
    proc = subprocess.run([sys.executable, "-m", "qcu.cli", "decompose", "--unitary", f"@{identity_file}"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["omega"] == 0.0
    proc = subprocess.run([sys.executable, "-m", "qcu.cli", "map"], capture_output=True, text=True, check=False)
    assert proc.returncode == 1
