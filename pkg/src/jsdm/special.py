"""Regularized incomplete gamma functions.

Power series for ``z < a + 1`` and a Lentz continued fraction otherwise, the
usual split that keeps both expansions in their fast-converging regime.
"""

from __future__ import annotations

import math

from .errors import DomainError

EPS = 1e-15
MAX_ITER = 10_000
_TINY = 1e-300


def _prefactor(a: float, z: float) -> float:
    # z^a e^-z / Gamma(a)
    return math.exp(a * math.log(z) - z - math.lgamma(a))


def _lower_series(a: float, z: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(MAX_ITER):
        ap += 1.0
        term *= z / ap
        total += term
        if abs(term) < abs(total) * EPS:
            return total * _prefactor(a, z)
    raise ArithmeticError(f"incomplete gamma series did not converge for a={a}, z={z}")


def _upper_continued_fraction(a: float, z: float) -> float:
    b = z + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h * _prefactor(a, z)
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge for a={a}, z={z}")


def _check(a: float, z: float) -> None:
    if not a > 0:
        raise DomainError(f"shape parameter must be positive, got {a!r}")
    if not z >= 0:
        raise DomainError(f"argument must be nonnegative, got {z!r}")


def gammainc_lower(a: float, z: float) -> float:
    """Regularized lower incomplete gamma ``P(a, z) = gamma(a, z) / Gamma(a)``."""
    _check(a, z)
    if z == 0:
        return 0.0
    if math.isinf(z):
        return 1.0
    if z < a + 1.0:
        return min(1.0, _lower_series(a, z))
    return max(0.0, 1.0 - _upper_continued_fraction(a, z))


def gammainc_upper(a: float, z: float) -> float:
    """Regularized upper incomplete gamma ``Q(a, z) = 1 - P(a, z)``."""
    _check(a, z)
    if z == 0:
        return 1.0
    if math.isinf(z):
        return 0.0
    if z < a + 1.0:
        return max(0.0, 1.0 - _lower_series(a, z))
    return min(1.0, _upper_continued_fraction(a, z))
