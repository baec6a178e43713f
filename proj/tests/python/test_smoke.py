import json
import math
import os

import pytest

import resbvp

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def load(name):
    with open(os.path.join(DATA, name)) as f:
        return json.load(f)


def test_analyze_example():
    rep = resbvp.analyze(resbvp.example_problem("0"))
    assert rep["Lambda"] == [[-1.0, -2.0], [-1.0, -2.0]]
    assert rep["A_bar"] >= rep["A_probe"] > 0


def test_check_and_solve_log_family():
    problem = resbvp.example_problem()
    rep = resbvp.check(problem, c=3.0, d=2343.4212, orientation="standard")
    assert rep["verdict"] == "PASS"
    sets = rep["sets"]
    assert sets["O++"] == [2] and sets["O--"] == [3]
    sol = resbvp.solve(problem, orientation="standard")
    assert sol["recurrence_residual"] < 1e-9
    assert sol["boundary_residual"] < 1e-9
    assert len(sol["y"]) == 10


def test_zero_g():
    problem = load("zero_g.json")
    assert resbvp.check(problem, c=1.0, d=10.0, orientation="standard")["verdict"] == "FAIL(C2-strictness)"
    sol = resbvp.solve(problem)
    assert sol["alpha"] == 0.0
    assert all(v == 0.0 for v in sol["y"])


def test_oracle_is_deterministic():
    problem = load("atan.json")
    a = resbvp.oracle(problem, starts=16, box=5.0, seed=3)
    b = resbvp.oracle(problem, starts=16, box=5.0, seed=3)
    assert a == b
    assert a["count"] >= 1
    for s in a["solutions"]:
        assert s["recurrence_residual"] <= 1e-10


def test_nullity_and_errors():
    assert resbvp.nullity(load("atan.json")) == 1
    assert resbvp.nullity(load("nonresonant.json")) == 0
    with pytest.raises(resbvp.NumericalError):
        resbvp.analyze(load("nonresonant.json"))
    with pytest.raises(ValueError):
        resbvp.analyze(load("malformed.json"))
    with pytest.raises(ValueError):
        resbvp.check(load("atan.json"), c=1.0)


def test_evaluate():
    assert resbvp.evaluate("atan(x) + t", 2, 1.0) == pytest.approx(math.atan(1.0) + 2)
    with pytest.raises(resbvp.NumericalError):
        resbvp.evaluate("ln(x)", 0, -1.0)
    with pytest.raises(ValueError):
        resbvp.evaluate("ln(", 0, 1.0)
