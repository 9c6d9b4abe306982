"""Numerics behind the metric/non-metric classification of ``D_JS ** alpha``.

A power ``[D_f]^alpha`` of a self-conjugate f-divergence satisfies the
triangle inequality whenever ``h_alpha(u) = (1 - u^alpha)^(1/alpha) / f(u)``
is nonincreasing on ``[0, 1)``. For the Jensen-Shannon generator the sign of
``h_alpha'`` reduces to the sign of :func:`sign_term`, and :func:`delta_u` is
the same condition rearranged as ``u^alpha >= critical ratio``.

Everything here is vectorized over ``u``. Close to ``u = 1`` the textbook
expressions lose almost all digits (the quantities vanish like (1-u)^2 or
(1-u)^3), so the implementations work with ``t = (1-u)/(1+u)`` and
``log1p``/``atanh`` instead.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError
from .probability import (
    LN2,
    AlphaExponent,
    Classification,
    ProbDist,
    f_js,
    jsd_rows,
)

__all__ = [
    "f_js",
    "h_alpha",
    "dh_alpha_du",
    "sign_term",
    "delta_u",
    "classify_alpha",
    "Classification",
    "ScanGrid",
    "MonotonicityReport",
    "TriangleCounterexample",
    "monotonicity_scan",
    "sample_simplex",
    "probe_triple",
    "triangle_search",
    "figure_data",
    "FIG2_DELTA_ALPHAS",
]

MONOTONICITY_TOL = 1e-10
TRIANGLE_TOL = 1e-12
GRID_LOWER = 1e-6
FIG2_DELTA_ALPHAS = (0.01, 0.1, 0.2, 0.3, 0.4)
_TRIANGLE_BATCH = 10_000


def _scalar_or_array(out: np.ndarray):
    return float(out) if out.ndim == 0 else out


def _check_alpha(alpha: float) -> float:
    if not (alpha > 0 and math.isfinite(alpha)):
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    return float(alpha)


def _u_array(u, *, closed_at_zero: bool) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    low_ok = arr >= 0 if closed_at_zero else arr > 0
    if not np.all(low_ok & (arr < 1)):
        interval = "[0, 1)" if closed_at_zero else "(0, 1)"
        raise DomainError(f"u must lie in {interval}")
    return arr


def _one_minus_pow(u: np.ndarray, alpha: float) -> np.ndarray:
    """``1 - u**alpha`` without cancellation near ``u = 1``."""
    with np.errstate(divide="ignore"):
        return -np.expm1(alpha * np.log(u))


def _half_series(order: int = 48) -> np.ndarray:
    """Taylor coefficients of ``sqrt((1+t)/(1-t)) ln(1+t) + ln(1-t)``.

    This is the sign term (over ``u``) at ``alpha = 1/2``; its expansion starts
    at ``t^4``, so summing exact rational coefficients avoids the cancellation.
    """
    n = order + 1

    def binom(e: Fraction, sign: int) -> list:
        # (1 + sign*t)^e
        out, c = [], Fraction(1)
        for k in range(n):
            out.append(c * sign**k)
            c = c * (e - k) / (k + 1)
        return out

    def mul(a, b):
        return [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n)]

    root = mul(binom(Fraction(1, 2), 1), binom(Fraction(-1, 2), -1))
    log_plus = [Fraction(0)] + [Fraction((-1) ** (k + 1), k) for k in range(1, n)]
    log_minus = [Fraction(0)] + [Fraction(-1, k) for k in range(1, n)]
    coeffs = [a + b for a, b in zip(mul(root, log_plus), log_minus)]
    return np.array([float(c) for c in coeffs])


_HALF_SERIES = _half_series()


def _sign_term_nats(u: np.ndarray, alpha: float) -> np.ndarray:
    # u^a ln(2/(1+u)) - u ln((1+u)/(2u)), i.e. sign_term * ln 2
    ua = u**alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = ua * np.log(2.0 / (1.0 + u)) + u * np.log(2.0 * u / (1.0 + u))
        # with t = (1-u)/(1+u) and u = exp(-2 atanh t) the term over u is
        # e^A ln(1+t) + ln(1-t) at alpha = 1/2 plus e^A expm1(-2cA) ln(1+t),
        # where A = atanh t and c = alpha - 1/2
        t = (1.0 - u) / (1.0 + u)
        big_a = np.arctanh(t)
        half = np.polynomial.polynomial.polyval(t, _HALF_SERIES)
        rest = np.exp(big_a) * np.expm1(-2.0 * (alpha - 0.5) * big_a) * np.log1p(t)
        near_one = u * (half + rest)
    return np.where(u > 0.5, near_one, direct)


def sign_term(u, alpha: float):
    """``u log2 u + (u + u^alpha)(1 - log2(1+u))`` on ``(0, 1)``.

    Its sign is opposite to the sign of :func:`dh_alpha_du`.
    """
    alpha = _check_alpha(alpha)
    arr = _u_array(u, closed_at_zero=False)
    return _scalar_or_array(_sign_term_nats(arr, alpha) / LN2)


def h_alpha(u, alpha: float):
    """``(1 - u^alpha)^(1/alpha) / f_js(u)`` for ``u`` in ``[0, 1)``."""
    alpha = _check_alpha(alpha)
    arr = _u_array(u, closed_at_zero=True)
    out = _one_minus_pow(arr, alpha) ** (1.0 / alpha) / f_js(arr)
    return _scalar_or_array(np.asarray(out))


def dh_alpha_du(u, alpha: float):
    """Closed-form derivative of :func:`h_alpha` with respect to ``u``."""
    alpha = _check_alpha(alpha)
    arr = _u_array(u, closed_at_zero=False)
    f = np.asarray(f_js(arr))
    out = (
        -_one_minus_pow(arr, alpha) ** (1.0 / alpha - 1.0)
        * (_sign_term_nats(arr, alpha) / LN2)
        / (2.0 * arr * f * f)
    )
    return _scalar_or_array(out)


def delta_u(u, alpha: float):
    """``u^alpha - u ln((1+u)/(2u)) / ln(2/(1+u))``, zero at ``u = 0``.

    Negative values mark points where the sufficient condition for the
    triangle inequality fails.
    """
    alpha = _check_alpha(alpha)
    arr = _u_array(u, closed_at_zero=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (1.0 - arr) / (1.0 + arr)
        denom = np.where(arr > 0.5, np.log1p(t), np.log(2.0 / (1.0 + arr)))
        out = _sign_term_nats(arr, alpha) / denom
    return _scalar_or_array(np.where(arr == 0, 0.0, out))


def classify_alpha(alpha: float) -> AlphaExponent:
    return AlphaExponent(_check_alpha(alpha))


@dataclass(frozen=True)
class ScanGrid:
    points: np.ndarray
    spacing: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise DomainError("grid must be a non-empty 1-d sequence")
        if np.any(pts < 0) or np.any(pts >= 1):
            raise DomainError("grid points must lie in [0, 1)")
        if np.any(np.diff(pts) <= 0):
            raise DomainError("grid points must be strictly increasing")
        if not self.spacing > 0:
            raise DomainError("grid spacing must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, n: int, lower: float = GRID_LOWER) -> ScanGrid:
        """``n`` evenly spaced points from ``lower`` up to (excluding) 1."""
        spacing = (1.0 - lower) / n
        return cls(lower + spacing * np.arange(n), spacing)

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class MonotonicityReport:
    alpha: float
    nonincreasing: bool
    worst_point: float
    worst_derivative: float
    tolerance: float = MONOTONICITY_TOL


def monotonicity_scan(alpha: float, grid: ScanGrid, tol: float = MONOTONICITY_TOL) -> MonotonicityReport:
    """Check that ``h_alpha`` is nonincreasing on ``grid``.

    The report carries the point where the derivative is largest, so a
    failing scan shows where the condition breaks first.
    """
    if grid.points[0] <= 0:
        raise DomainError("derivative scans need grid points strictly inside (0, 1)")
    values = np.asarray(dh_alpha_du(grid.points, alpha))
    worst = int(np.argmax(values))
    worst_value = float(values[worst])
    return MonotonicityReport(
        alpha=float(alpha),
        nonincreasing=worst_value <= tol,
        worst_point=float(grid.points[worst]),
        worst_derivative=worst_value,
        tolerance=tol,
    )


@dataclass(frozen=True)
class TriangleCounterexample:
    """Triple violating ``d(p, q) <= d(p, r) + d(r, q)`` beyond ``tolerance``."""

    p: ProbDist
    q: ProbDist
    r: ProbDist
    alpha: float
    lhs: float
    rhs: float
    gap: float
    tolerance: float = TRIANGLE_TOL

    def __post_init__(self):
        if not self.gap > self.tolerance:
            raise ValueError(f"gap {self.gap!r} does not exceed tolerance {self.tolerance!r}")

    def as_dict(self) -> dict:
        return {
            "p": self.p.probs.tolist(),
            "q": self.q.probs.tolist(),
            "r": self.r.probs.tolist(),
            "alpha": self.alpha,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
        }


def sample_simplex(rng: np.random.Generator, size, dim: int) -> np.ndarray:
    """Uniform draws from the probability simplex via normalized exponentials."""
    if isinstance(size, int):
        size = (size,)
    e = rng.standard_exponential((*size, dim))
    return e / e.sum(axis=-1, keepdims=True)


def probe_triple(dim: int = 2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fixed witness ``p = (1, 0)``, ``q = (0, 1)``, ``r = (1/2, 1/2)`` in ``dim`` cells.

    ``D_JS(p, q) = 1`` while both legs through ``r`` are about 0.311, so the
    triangle inequality fails for every ``alpha >= 1``.
    """
    if dim < 2:
        raise DomainError("probe triple needs dim >= 2")
    p, q, r = np.zeros(dim), np.zeros(dim), np.zeros(dim)
    p[0] = 1.0
    q[1] = 1.0
    r[:2] = 0.5
    return p, q, r


def _first_violation(p, q, r, alpha, tol) -> Optional[TriangleCounterexample]:
    lhs = jsd_rows(p, q) ** alpha
    rhs = jsd_rows(p, r) ** alpha + jsd_rows(r, q) ** alpha
    gap = np.atleast_1d(lhs - rhs)
    bad = np.flatnonzero(gap > tol)
    if bad.size == 0:
        return None
    i = int(bad[0])
    p2, q2, r2 = np.atleast_2d(p), np.atleast_2d(q), np.atleast_2d(r)
    return TriangleCounterexample(
        p=ProbDist(p2[i]),
        q=ProbDist(q2[i]),
        r=ProbDist(r2[i]),
        alpha=float(alpha),
        lhs=float(np.atleast_1d(lhs)[i]),
        rhs=float(np.atleast_1d(rhs)[i]),
        gap=float(gap[i]),
        tolerance=tol,
    )


def triangle_search(
    alpha: float,
    dim: int,
    samples: int,
    seed: int,
    tol: float = TRIANGLE_TOL,
) -> Optional[TriangleCounterexample]:
    """Look for a triangle-inequality violation of ``D_JS ** alpha``.

    The fixed probe triple is always tried first; then ``samples`` uniform
    random triples are drawn in batches of 10 000, batch ``k`` using the
    generator seeded with ``[seed, k]``. Returns the first violation in draw
    order, or ``None``.

    ``None`` means no counterexample was found, not that the function is a
    metric.
    """
    alpha = _check_alpha(alpha)
    if dim < 2:
        raise DomainError("dim must be at least 2")
    if samples < 1:
        raise DomainError("samples must be at least 1")
    found = _first_violation(*probe_triple(dim), alpha, tol)
    if found is not None:
        return found
    for batch, start in enumerate(range(0, samples, _TRIANGLE_BATCH)):
        n = min(_TRIANGLE_BATCH, samples - start)
        rng = np.random.default_rng([seed, batch])
        triples = sample_simplex(rng, (n, 3), dim)
        found = _first_violation(triples[:, 0], triples[:, 1], triples[:, 2], alpha, tol)
        if found is not None:
            return found
    return None


def figure_data(
    which: str,
    *,
    u_points: int = 200,
    alpha_points: int = 50,
    u_min: float = GRID_LOWER,
    delta_alphas: Iterable[float] = FIG2_DELTA_ALPHAS,
) -> np.ndarray:
    """Rows of ``(u, alpha, value)`` for the two analysis plots.

    ``"fig1"`` is the surface ``-dh_alpha/du`` over ``u in [u_min, 1)`` and
    ``alpha in (0, 1/2]``. ``"fig2"`` gives ``delta_u`` curves over
    ``u in [0, 1)`` for ``alpha = 1/2 + d`` with ``d`` in ``delta_alphas``.
    """
    which = which.lower()
    if which in ("fig1", "1"):
        us = ScanGrid.uniform(u_points, u_min).points
        alphas = 0.5 * np.arange(1, alpha_points + 1) / alpha_points
        rows = [
            np.column_stack([us, np.full_like(us, a), -np.asarray(dh_alpha_du(us, a))])
            for a in alphas
        ]
    elif which in ("fig2", "2"):
        us = np.arange(u_points) / u_points
        rows = [
            np.column_stack([us, np.full_like(us, 0.5 + d), np.asarray(delta_u(us, 0.5 + d))])
            for d in delta_alphas
        ]
    else:
        raise DomainError(f"unknown figure {which!r}; expected 'fig1' or 'fig2'")
    return np.vstack(rows)

