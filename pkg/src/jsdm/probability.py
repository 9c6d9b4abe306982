"""Discrete distributions, Shannon entropy and the divergences built on it.

All logarithms are base 2, so entropies and divergences are in bits and the
Jensen-Shannon divergence lies in [0, 1].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    AbsoluteContinuityViolation,
    DimensionMismatch,
    Divergent,
    DomainError,
    InvalidDistribution,
    InvalidGenerator,
)

NEGATIVE_CLAMP = 1e-12
SUM_TOLERANCE = 1e-9
LN2 = math.log(2.0)


class ProbDist:
    """Immutable finite probability vector.

    Entries in ``[-1e-12, 0)`` are treated as rounding noise, clamped to zero
    and the vector renormalized. Anything further from a valid distribution
    raises :class:`InvalidDistribution`.

    >>> ProbDist([0.25, 0.75]).probs
    array([0.25, 0.75])
    """

    __slots__ = ("_probs",)

    def __init__(self, probs: Sequence[float] | np.ndarray):
        arr = np.array(probs, dtype=float).ravel()
        if arr.size == 0:
            raise InvalidDistribution("distribution must have at least one entry")
        if not np.all(np.isfinite(arr)):
            raise InvalidDistribution(f"non-finite entry in {arr.tolist()}")
        if np.any(arr < -NEGATIVE_CLAMP):
            raise InvalidDistribution(f"negative entry in {arr.tolist()}")
        total = arr.sum()
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidDistribution(f"entries sum to {total!r}, not 1")
        arr[arr < 0] = 0.0
        total = arr.sum()
        if total != 1.0:
            arr /= total
        arr.setflags(write=False)
        self._probs = arr

    @classmethod
    def from_counts(cls, counts: Sequence[float] | np.ndarray) -> ProbDist:
        counts = np.asarray(counts, dtype=float)
        total = counts.sum()
        if total <= 0:
            raise InvalidDistribution("counts must have a positive total")
        return cls(counts / total)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    def __len__(self) -> int:
        return self._probs.size

    def __iter__(self):
        return iter(self._probs.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbDist):
            return NotImplemented
        return np.array_equal(self._probs, other._probs)

    def __hash__(self) -> int:
        return hash(self._probs.tobytes())

    def __repr__(self) -> str:
        return f"ProbDist({self._probs.tolist()})"


def _as_dist(p) -> ProbDist:
    return p if isinstance(p, ProbDist) else ProbDist(p)


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p, q = _as_dist(p), _as_dist(q)
    if len(p) != len(q):
        raise DimensionMismatch(f"dimensions differ: {len(p)} vs {len(q)}")
    return p.probs, q.probs


@dataclass(frozen=True)
class WeightPair:
    pi1: float
    pi2: float

    def __post_init__(self):
        if not (0.0 <= self.pi1 <= 1.0 and 0.0 <= self.pi2 <= 1.0):
            raise DomainError(f"weights must lie in [0, 1], got ({self.pi1}, {self.pi2})")
        if abs(self.pi1 + self.pi2 - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1, got {self.pi1 + self.pi2!r}")

    @classmethod
    def from_first(cls, pi1: float) -> WeightPair:
        return cls(pi1, 1.0 - pi1)


class Classification(str, enum.Enum):
    METRIC = "Metric"
    NOT_METRIC = "NotMetric"
    CONJECTURED_NOT_METRIC = "ConjecturedNotMetric"


@dataclass(frozen=True)
class AlphaExponent:
    """Exponent of the power family ``D_JS ** alpha`` with its metric status.

    ``(0, 1/2]`` is proven metric, ``[1, inf)`` proven non-metric, and the gap
    in between is only conjectured non-metric.
    """

    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise DomainError(f"alpha must be a positive finite number, got {self.value!r}")

    @property
    def classification(self) -> Classification:
        if self.value <= 0.5:
            return Classification.METRIC
        if self.value >= 1.0:
            return Classification.NOT_METRIC
        return Classification.CONJECTURED_NOT_METRIC


def _xlog2x(x: np.ndarray) -> np.ndarray:
    positive = x > 0
    return np.where(positive, x * np.log2(np.where(positive, x, 1.0)), 0.0)


def entropy_rows(probs: np.ndarray) -> np.ndarray:
    """Shannon entropy in bits along the last axis of an array of distributions."""
    return -np.sum(_xlog2x(np.asarray(probs, dtype=float)), axis=-1)


def shannon_entropy(p) -> float:
    return float(entropy_rows(_as_dist(p).probs))


def kl_divergence(p, q) -> float:
    p, q = _pair(p, q)
    support = p > 0
    if np.any(support & (q == 0)):
        raise AbsoluteContinuityViolation("p is not absolutely continuous with respect to q")
    value = float(np.sum(p[support] * np.log2(p[support] / q[support])))
    return max(value, 0.0)


def jsd_rows(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Jensen-Shannon divergence along the last axis of two stacked arrays.

    No validation; callers pass arrays of valid distributions. Written so the
    result is exactly symmetric under swapping ``p`` and ``q``.
    """
    mid = 0.5 * (p + q)
    value = entropy_rows(mid) - 0.5 * (entropy_rows(p) + entropy_rows(q))
    return np.clip(value, 0.0, 1.0)


def jsd(p, q) -> float:
    p, q = _pair(p, q)
    return float(jsd_rows(p, q))


def jsd_weighted(p, q, w: WeightPair | tuple[float, float]) -> float:
    p, q = _pair(p, q)
    if not isinstance(w, WeightPair):
        w = WeightPair(*w)
    mix = w.pi1 * p + w.pi2 * q
    value = float(entropy_rows(mix)) - (w.pi1 * float(entropy_rows(p)) + w.pi2 * float(entropy_rows(q)))
    return max(value, 0.0)


def d_alpha(p, q, a: AlphaExponent | float) -> float:
    alpha = a.value if isinstance(a, AlphaExponent) else AlphaExponent(float(a)).value
    return jsd(p, q) ** alpha


# Coefficients of (1+t)ln(1+t) + (1-t)ln(1-t) = sum_k t^(2k) / (k(2k-1)),
# highest power first for polyval. 30 terms exhaust double precision for |t| <= 1/2.
_FJS_SERIES = np.array([1.0 / (k * (2 * k - 1)) for k in range(30, 0, -1)] + [0.0])


def f_js(u):
    """Generator of the Jensen-Shannon divergence.

    ``f(u) = ((1+u) + u log2 u - (1+u) log2(1+u)) / 2`` with ``f(0) = 1/2``.
    Near ``u = 1`` the direct form cancels catastrophically, so for
    ``u in [1/3, 3]`` it is evaluated through the even power series in
    ``t = (1-u)/(1+u)``.

    Accepts scalars or arrays; returns the same shape.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0) or np.any(np.isnan(u_arr)):
        raise DomainError("f_js is defined for u >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (1.0 - u_arr) / (1.0 + u_arr)
        series = np.polyval(_FJS_SERIES, t * t) / (2.0 * LN2 * (1.0 + t))
        direct = 0.5 * (_xlog2x(u_arr) + (1.0 + u_arr) * (1.0 - np.log2(1.0 + u_arr)))
    out = np.where(np.abs(t) <= 0.5, series, direct)
    out = np.where(np.isinf(u_arr), np.inf, out)
    return float(out) if out.ndim == 0 else out


def f_kl(u):
    """Generator of the Kullback-Leibler divergence, ``u log2 u``."""
    u_arr = np.asarray(u, dtype=float)
    out = _xlog2x(u_arr)
    return float(out) if out.ndim == 0 else out


_CONVEXITY_GRID = (0.0, 0.05, 0.2, 0.5, 0.9, 1.0, 1.1, 2.0, 5.0, 20.0)


@dataclass(frozen=True)
class FGenerator:
    """Convex generator ``f`` of a Csiszar divergence.

    ``value_at_0`` is ``f(0)`` and ``conj_at_0`` is ``f*(0)``, the limit of
    ``u f(1/u)`` as ``u -> 0``. Both may be ``inf``.
    """

    fn: Callable[[float], float] = field(repr=False)
    value_at_0: float
    conj_at_0: float
    label: str = "f"

    def __post_init__(self):
        at_one = float(self.fn(1.0))
        if abs(at_one) > 1e-12:
            raise InvalidGenerator(f"{self.label}: f(1) = {at_one!r}, expected 0")
        for i, a in enumerate(_CONVEXITY_GRID):
            for b in _CONVEXITY_GRID[i + 1:]:
                mid = float(self.fn(0.5 * (a + b)))
                chord = 0.5 * (float(self.fn(a)) + float(self.fn(b)))
                if mid > chord + 1e-12:
                    raise InvalidGenerator(f"{self.label}: not convex between {a} and {b}")

    def __call__(self, u: float) -> float:
        if u == 0:
            return self.value_at_0
        return float(self.fn(u))


F_JS = FGenerator(f_js, value_at_0=0.5, conj_at_0=0.5, label="jensen-shannon")
F_KL = FGenerator(f_kl, value_at_0=0.0, conj_at_0=math.inf, label="kullback-leibler")


def f_divergence(p, q, f: FGenerator) -> float:
    """``sum_i q_i f(p_i / q_i)`` with the usual limits on empty cells.

    A cell with ``q_i = 0`` contributes ``p_i f*(0)`` and one with ``p_i = 0``
    contributes ``q_i f(0)``; a cell where both vanish contributes nothing.
    """
    p, q = _pair(p, q)
    total = 0.0
    for pi, qi in zip(p.tolist(), q.tolist()):
        if qi == 0.0:
            if pi == 0.0:
                continue
            term = pi * f.conj_at_0
        elif pi == 0.0:
            term = qi * f.value_at_0
        else:
            term = qi * f(pi / qi)
        total += term
    if math.isinf(total) or math.isnan(total):
        raise Divergent(f"{f.label} divergence is infinite for these inputs")
    return total
