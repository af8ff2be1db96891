import csv
import io
import json
import math
import subprocess
import sys
from fractions import Fraction as F

import numpy as np
import pytest

from nppt_activation import activation, cli, geometry
from nppt_activation.states import SymmetricSpec, symmetric_matrix
from nppt_activation.tensor import operator_to_json


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_extremes_tau5_d3(capsys):
    code, out, _ = run(capsys, "extremes", "--d", 3)
    assert code == 0
    data = json.loads(out)
    assert data["points"]["tau5"] == ["1/5", "0", "0"]
    assert data["points"]["tau0"] == ["1/6", "0", "1/12"]


def test_extremes_csv(capsys):
    code, out, _ = run(capsys, "extremes", "--d", 4, "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    names = [r[0] for r in rows[1:]]
    assert "tau5" in names and "p1" in names


def test_activate_boundary_point(capsys):
    code, out, _ = run(capsys, "activate", "--d", 3, "--alpha", "3/2",
                       "--lambda", "1/6", "0", "1/12", "--verify")
    assert code == 0
    data = json.loads(out)
    assert data["report"]["fidelity"] == pytest.approx(1 / 3, abs=1e-12)
    assert data["report"]["activated"] is False
    assert data["bruteforce_gap"] <= 1e-10


def test_activate_tau5_activates(capsys):
    code, out, _ = run(capsys, "activate", "--d", 3, "--alpha", 2, "--lambda", "1/5", 0, 0)
    assert code == 0
    assert json.loads(out)["report"]["activated"] is True


def test_activate_from_sigma_file(tmp_path, capsys):
    sigma = symmetric_matrix(SymmetricSpec.from_point(3, (F(1, 5), F(0), F(0))))
    path = tmp_path / "sigma.json"
    path.write_text(operator_to_json(sigma))
    code, out, _ = run(capsys, "activate", "--d", 3, "--alpha", 2, "--sigma", path)
    assert code == 0
    data = json.loads(out)
    assert data["report"]["activated"] is True
    code, _, err = run(capsys, "activate", "--d", 4, "--alpha", 2, "--sigma", path)
    assert code == 1
    path.write_text(json.dumps(operator_to_json(sigma)))
    code, _, err = run(capsys, "activate", "--d", 3, "--alpha", 2, "--sigma", path)
    assert code == 1 and "JSON object" in err


def test_classify_consistent_with_library(capsys):
    for pt in [("1/5", 0, 0), ("1/6", 0, "1/12"), (0, 0, "1/2"), ("1/2", "1/2", "1/2"), ("1/20", "1/20", "1/20")]:
        code, out, _ = run(capsys, "classify", "--d", 3, "--lambda", *pt)
        assert code == 0
        data = json.loads(out)
        expected = geometry.classify(geometry.to_point(tuple(F(str(x)) for x in pt)), 3)
        assert data["label"] == expected.label.name
        assert data["evidence"]["witness_value"] == str(expected.witness_value)


def test_classify_with_alpha_reports_margin(capsys):
    code, out, _ = run(capsys, "classify", "--d", 3, "--lambda", "1/5", 0, 0, "--alpha", 2)
    data = json.loads(out)
    assert F(data["margin"]) == geometry.activation_margin((F(1, 5), F(0), F(0)), F(2), 3)
    assert F(data["margin"]) > 0


def test_regions_rows_and_order(capsys):
    n = 6
    code, out, _ = run(capsys, "regions", "--d", 3, "--resolution", n)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == math.comb(n + 3, 3)
    keys = [tuple(F(r[k]) for k in ("l1", "l2", "l3")) for r in rows]
    assert keys == sorted(keys)
    assert all(sum(k) <= 1 for k in keys)
    for r, k in zip(rows, keys):
        assert r["label"] == geometry.classify(k, 3).label.name


def test_regions_deterministic_across_workers(capsys, monkeypatch, tmp_path):
    _, serial, _ = run(capsys, "regions", "--d", 3, "--resolution", 5)
    _, again, _ = run(capsys, "regions", "--d", 3, "--resolution", 5)
    monkeypatch.setenv("NPPT_ACTIVATION_THREADS", "2")
    _, parallel, _ = run(capsys, "regions", "--d", 3, "--resolution", 5)
    assert serial.encode() == again.encode() == parallel.encode()


def test_plane_d3_and_large_d(capsys):
    code, out, _ = run(capsys, "plane", "--d", 3, "--alpha", 2)
    assert code == 0
    code, out, _ = run(capsys, "plane", "--d", 5, "--alpha", 2)
    assert code == 0
    data = json.loads(out)
    assert data


def test_witness_command(capsys):
    code, out, _ = run(capsys, "witness", "--d", 3, "--lambda", "1/5", 0, 0, "--samples", 500)
    assert code == 0
    data = json.loads(out)
    assert data["exact_value"] == "-1/5"
    assert data["certificate"] == "entangled"
    code, _, _ = run(capsys, "witness", "--lambda", "1/5", 0, 0)
    assert code == 1


def test_distill_check_outputs(capsys):
    code, out, _ = run(capsys, "distill-check", "--werner", 3, 2)
    assert code == 0
    data = json.loads(out)
    assert data["certificate"] == "distillable_certified"
    arg = data["argmin"]
    assert arg["labels"] == ["A", "B"] and arg["dims"] == [3, 3]
    psi = np.array(arg["re"]) + 1j * np.array(arg["im"])
    assert np.linalg.norm(psi) == pytest.approx(1, abs=1e-12)
    sv = np.linalg.svd(psi.reshape(3, 3), compute_uv=False)
    assert sv[2] < 1e-8
    code, out, _ = run(capsys, "distill-check", "--werner", 3, "1.4")
    assert json.loads(out)["certificate"] == "inconclusive"
    code, out, _ = run(capsys, "distill-check", "--isotropic", 3, "0.5")
    assert json.loads(out)["certificate"] == "distillable_certified"


def test_deterministic_bytes(capsys):
    _, a, _ = run(capsys, "distill-check", "--werner", 3, "2.5", "--seed", 7)
    _, b, _ = run(capsys, "distill-check", "--werner", 3, "2.5", "--seed", 7)
    assert a.encode() == b.encode()


def test_output_file(tmp_path, capsys):
    path = tmp_path / "x.json"
    code, out, _ = run(capsys, "extremes", "--d", 3, "--output", path)
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["points"]["tau5"] == ["1/5", "0", "0"]


@pytest.mark.parametrize("argv", [
    ["classify", "--d", "3"],
    ["classify", "--d", "1", "--lambda", "0", "0", "0"],
    ["activate", "--d", "3", "--alpha", "5", "--lambda", "0", "0", "0"],
    ["activate", "--d", "3", "--alpha", "x", "--lambda", "0", "0", "0"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.exit(cli.main(argv))
    assert exc.value.code == 1


def test_numerical_failure_exit_2(capsys):
    code, _, err = run(capsys, "activate", "--d", 3, "--alpha", 3, "--lambda", 0, 0, 0)
    assert code == 2
    assert "numerical failure" in err


def test_verify_disagreement_exit_3(capsys, monkeypatch):
    real = activation.fidelity_bruteforce

    def skewed(alpha, sigma, d):
        rep = real(alpha, sigma, d)
        return activation.ActivationReport(rep.fidelity + 1e-3, rep.success_probability,
                                           rep.margin, rep.activated)

    monkeypatch.setattr(activation, "fidelity_bruteforce", skewed)
    code, out, _ = run(capsys, "activate", "--d", 3, "--alpha", 2, "--lambda", "1/5", 0, 0, "--verify")
    assert code == 3
    assert json.loads(out)["bruteforce_gap"] > 1e-10


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "nppt_activation.cli", "extremes", "--d", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["points"]["tau5"] == ["1/5", "0", "0"]
