"""Bergman kernel expansion coefficients for polynomial weights.

Weights are given as dictionaries ``{"n", "point", "monomials"}`` where each
monomial ``{"alpha", "beta", "re", "im"}`` is a coefficient of zbar^alpha z^beta.
"""

import json

from . import _core
from ._core import NumericalError, ValidationError

__all__ = [
    "NumericalError",
    "ValidationError",
    "c_constant",
    "fit",
    "normalize",
    "oracle",
    "phase_residual",
    "random_spec",
    "report",
    "trace_b1",
]


def _dump(spec):
    return spec if isinstance(spec, str) else json.dumps(spec)


def normalize(spec):
    return json.loads(_core.normalize(_dump(spec)))


def report(spec, tol=1e-9, exact=False, fit=False):
    return json.loads(_core.report(_dump(spec), tol, exact, fit))


def trace_b1(spec):
    """Tr b1 at the point as (coordinate route, invariant route)."""
    return _core.trace_b1(_dump(spec))


def c_constant(spec):
    return json.loads(_core.c_constant(_dump(spec)))


def phase_residual(spec, order=5):
    return _core.phase_residual(_dump(spec), order)


def fit(spec, k_grid):
    return json.loads(_core.fit(_dump(spec), list(k_grid)))


def oracle(spec, k):
    """Numerical Bergman kernel on the diagonal at the origin, radial n = 1 weights."""
    return _core.oracle(_dump(spec), k)


def random_spec(n, q, seed):
    return json.loads(_core.random_spec(n, q, seed))
