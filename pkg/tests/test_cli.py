from __future__ import annotations

import json

import numpy as np
import pytest

from splitym import charge, cli
from splitym.errors import ChargeAccuracyError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def test_verify_algebra(capsys):
    code, rep, _ = run(capsys, "verify", "algebra")
    assert code == cli.EXIT_OK and rep["schema"] == 1
    assert rep["records"] and all(r["pass"] for r in rep["records"])


def test_verify_solutions_includes_charge(capsys):
    code, rep, _ = run(capsys, "verify", "solutions")
    assert code == 0
    assert any("charge" in r["check"] and r["expected"] == 1.0 for r in rep["records"])


def test_verify_bogus(capsys):
    code, rep, err = run(capsys, "verify", "bogus")
    assert code == cli.EXIT_USAGE and rep is None and "unknown suite" in err


def test_no_timing_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["verify", "grassmann", "--no-timing", "--out", str(a)]) == 0
    assert cli.main(["--no-timing", "verify", "grassmann", "--out", str(b)]) == 0
    assert capsys.readouterr().out == ""
    assert a.read_bytes() == b.read_bytes()
    assert all(r["runtime_ms"] == 0 for r in json.loads(a.read_text())["records"])


def test_seed_changes_samples(capsys):
    _, a, _ = run(capsys, "verify", "algebra", "--no-timing")
    _, b, _ = run(capsys, "verify", "algebra", "--no-timing", "--seed", "5")
    assert a["metadata"]["seed"] == 0 and b["metadata"]["seed"] == 5
    assert [r["value"] for r in a["records"]] != [r["value"] for r in b["records"]]


def test_bad_global_flag(capsys):
    code, _, err = run(capsys, "--seed", "-1", "verify", "algebra")
    assert code == cli.EXIT_USAGE and "seed" in err


def test_charge_anti(capsys):
    code, rep, _ = run(capsys, "charge", "split-anti")
    (r,) = rep["records"]
    assert code == 0 and abs(r["value"] + 1) < 1e-3


def test_charge_euclidean_note(capsys):
    code, rep, _ = run(capsys, "charge", "euclidean")
    (r,) = rep["records"]
    assert code == 0 and abs(r["value"] + 1) < 1e-3
    assert "misprint" in r["note"] and abs(r["radial_oracle"] + 1) < 1e-9


def test_charge_bad_tol(capsys):
    assert run(capsys, "charge", "split-anti", "--tol", "0")[0] == cli.EXIT_USAGE


def test_charge_accuracy_exit(capsys, monkeypatch):
    def fail(field, cfg=None):
        raise ChargeAccuracyError("no convergence", 0.97, 0.1)

    monkeypatch.setattr(charge, "topological_charge", fail)
    code, rep, _ = run(capsys, "charge", "split-instanton")
    (r,) = rep["records"]
    assert code == cli.EXIT_ACCURACY and r["value"] == 0.97 and not r["pass"]
    assert rep["metadata"]["command"] == "charge"


@pytest.mark.parametrize("spec, code", [
    ("f0", 0),
    ("poly:3+x11+x22", 0),
    ("poly:x11**2", 0),
    ("poly:1+x11*x22-x12*x21", 0),
    ("poly:foo(", 2),
    ("poly:sin(x11)", 2),
    ("nonsense", 2),
    ("poly:0", 4),
])
def test_thooft_specs(capsys, spec, code):
    assert run(capsys, "thooft", spec)[0] == code


def test_thooft_non_harmonic_reports_bounded_away(capsys):
    _, rep, _ = run(capsys, "thooft", "poly:2+x11*x22")
    assert any("bounded away" in r["check"] and r["pass"] for r in rep["records"])


def test_thooft_quadric(capsys, tmp_path):
    p = tmp_path / "q.txt"
    np.savetxt(p, np.diag([1.0, 1.0, 1.0, 1.0]))
    code, rep, _ = run(capsys, "thooft", f"quadric:{p}")
    assert code == 0 and rep["records"]


def test_xray(capsys, tmp_path):
    code, rep, _ = run(capsys, "xray", "inverse-square", "0.1,0.2,-0.3,0.4")
    assert code == 0
    assert run(capsys, "xray", "inverse-square", "0.1,0.2")[0] == cli.EXIT_USAGE


def test_adhm_bundled(capsys):
    code, rep, _ = run(capsys, "adhm", "universal")
    assert code == 0 and rep["metadata"]["file"] == "universal"
    code, rep, _ = run(capsys, "adhm", "degenerate")
    assert code == cli.EXIT_FAIL
    first = rep["records"][0]
    assert not first["pass"] and len(first["witness"]) == 4


def test_adhm_bad_file(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1 1\n1 2\n")
    assert run(capsys, "adhm", str(p))[0] == cli.EXIT_USAGE
    assert run(capsys, "adhm", str(tmp_path / "missing.txt"))[0] == cli.EXIT_USAGE


def test_conformal(capsys, tmp_path):
    p = tmp_path / "g.txt"
    np.savetxt(p, np.eye(4))
    code, rep, _ = run(capsys, "conformal", str(p))
    assert code == 0
    assert np.allclose(rep["metadata"]["center"], 0) and abs(rep["metadata"]["scale"] - 2) < 1e-12
    np.savetxt(p, np.eye(3))
    assert run(capsys, "conformal", str(p))[0] == cli.EXIT_USAGE
