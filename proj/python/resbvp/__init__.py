"""Resonant multipoint boundary value problems for nonlinear difference equations.

Problems are JSON documents (or dicts) with fields n, N, m, a, B and g.
Every report is returned as a dict.
"""

import json as _json

from . import _resbvp
from ._resbvp import NumericalError

__all__ = [
    "NumericalError",
    "analyze",
    "check",
    "solve",
    "oracle",
    "nullity",
    "example_problem",
    "evaluate",
]


def _text(problem):
    return problem if isinstance(problem, str) else _json.dumps(problem)


def analyze(problem):
    """Linear analysis: Lambda, kernel and cokernel bases, S, Psi and the norm bound."""
    return _json.loads(_resbvp.analyze(_text(problem)))


def check(problem, c=None, d=None, orientation="both", d_cap=1e8):
    """Existence conditions for (c, d), or a grid search when both are omitted."""
    return _json.loads(_resbvp.check(_text(problem), c, d, orientation, d_cap))


def solve(problem, c=None, d=None, orientation="both", d_cap=1e8, solve_tol=1e-10):
    """Certify, then solve by bisection on the kernel coordinate."""
    return _json.loads(_resbvp.solve(_text(problem), c, d, orientation, d_cap, solve_tol))


def oracle(problem, starts=64, box=10.0, seed=1):
    """Multistart Newton on the full system in the scalar unknowns."""
    return _json.loads(_resbvp.oracle(_text(problem), starts, box, seed))


def nullity(problem):
    """Dimension of the solution space of the homogeneous linear problem."""
    return _resbvp.nullity(_text(problem))


def example_problem(g=""):
    """The built-in two-step example; g defaults to the certified log family."""
    return _json.loads(_resbvp.example_problem(g))


def evaluate(expr, t, x):
    """Evaluates an expression in t and x."""
    return _resbvp.evaluate(expr, t, x)
