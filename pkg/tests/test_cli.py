import json
from pathlib import Path

import numpy as np
import pytest

from gtrs import conic
from gtrs.canonical import canonicalize
from gtrs.cli import main, parse_problem
from gtrs.errors import ParseError
from gtrs.reformulate import build_socp, canonical_problem

DATA = Path(__file__).parent / "data"
WORKED = str(DATA / "worked_example.json")
COMPLEX = str(DATA / "complex_pair.json")


def run(capsys, *argv):
    rc = main(list(argv))
    return rc, capsys.readouterr().out


def test_solve_worked_example(capsys):
    rc, out = run(capsys, "solve", WORKED)
    rep = json.loads(out)
    assert rc == 0 and rep["status"] == "optimal"
    assert abs(rep["value"] - (-3.3929)) <= 1e-3
    assert rep["x"][3] == pytest.approx(2 / 7, abs=1e-6)


def test_classify_complex_pair(capsys):
    rc, out = run(capsys, "classify", COMPLEX)
    rep = json.loads(out)
    assert rc == 0 and rep["status"] == "unbounded"
    assert [r["rule"] for r in rep["reasons"]] == ["ComplexPair"]
    assert rep["witness"] is not None


def test_export_matches_golden(capsys):
    rc, out = run(capsys, "export", WORKED)
    assert rc == 0
    assert out == (DATA / "worked_example.socp").read_text()


def test_export_round_trip_bit_exact():
    P, _, tol, _ = parse_problem(json.loads(Path(WORKED).read_text()))
    sp = build_socp(canonical_problem(P, canonicalize(P.A, P.D, tol), tol), tol)
    text = conic.dumps(sp)
    back = conic.loads(text)
    for f in ("alpha", "delta", "b", "e", "zeta"):
        assert np.array_equal(getattr(back, f), getattr(sp, f)), f
    for f in ("c", "c0", "obj_offset", "lo", "hi"):
        assert getattr(back, f) == getattr(sp, f), f
    assert conic.dumps(back) == text


def test_conic_parse_error():
    with pytest.raises(ParseError):
        conic.loads("NOT-A-CONE 1\n")


def test_deterministic_and_out_file(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["solve", WORKED, COMPLEX, "--seed", "5", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    reps = json.loads(a.read_text())
    assert [r["file"] for r in reps] == [WORKED, COMPLEX]
    assert capsys.readouterr().out == ""


def test_parallel_preserves_order(tmp_path):
    serial, par = tmp_path / "s.json", tmp_path / "p.json"
    main(["classify", WORKED, COMPLEX, "--out", str(serial)])
    main(["classify", WORKED, COMPLEX, "--parallel", "2", "--out", str(par)])
    assert serial.read_bytes() == par.read_bytes()


def test_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "D": [1, 2, 3], "A": [1, 0, 0, 1]}')
    rc, out = run(capsys, "solve", str(bad))
    assert rc == 1 and json.loads(out)["error"] == "ParseError"
    rc, out = run(capsys, "solve", str(tmp_path / "missing.json"))
    assert rc == 1 and json.loads(out)["error"] == "FileNotFoundError"


def test_unknown_command(capsys):
    assert main(["frobnicate", WORKED]) == 2


def test_infeasible_is_an_answer(tmp_path, capsys):
    p = tmp_path / "inf.json"
    p.write_text(json.dumps({"n": 1, "D": [1], "A": [1], "c": 1.0}))
    rc, out = run(capsys, "solve", str(p))
    assert rc == 0 and json.loads(out)["status"] == "infeasible"


def test_slemma_and_tolerance_overrides(tmp_path, capsys):
    doc = json.loads(Path(WORKED).read_text())
    doc["v"] = 3.0
    doc["tolerances"] = {"tol_dual": 1e-9}
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    rc, out = run(capsys, "slemma", str(p))
    rep = json.loads(out)
    assert rc == 0 and rep["status"] == "fails" and rep["verified"]
    assert rep["value"] == pytest.approx(-0.392857142857, abs=1e-8)


def test_asymmetric_input_warns(tmp_path, capsys):
    p = tmp_path / "asym.json"
    p.write_text(json.dumps({"n": 2, "D": [1, 0.5, 0, 1], "A": [1, 0, 0, 1], "c": -1}))
    rc, out = run(capsys, "solve", str(p))
    rep = json.loads(out)
    assert rc == 0 and "symmetrized" in rep["input_warnings"][0]


def test_canonical_and_oracle(capsys):
    rc, out = run(capsys, "canonical", WORKED)
    rep = json.loads(out)
    assert rc == 0 and rep["residual"] <= 1e-12
    rc, out = run(capsys, "oracle", WORKED, "--radius", "5", "--resolution", "21")
    rep = json.loads(out)
    assert rc == 0 and rep["value"] <= -3.39
