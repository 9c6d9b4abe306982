"""Recursive segmentation of symbolic sequences with powers of the weighted JSD.

A cursor at position ``ell`` splits a sequence of length ``L`` into a left
part with symbol frequencies ``f`` and a right part with frequencies ``g``.
The statistic is

    d'_alpha(ell) = [ D_JS^(pi1, pi2)(f, g) ]^alpha,  pi1 = ell/L, pi2 = 1 - pi1

in bits. Since ``pi1 f + pi2 g`` is the frequency vector of the whole
sequence, the whole profile over ``ell`` comes from cumulative symbol counts
in one vectorized pass.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, EmptyWindow, InvalidDistribution, SequenceTooShort
from .probability import LN2, ProbDist, entropy_rows, jsd_weighted
from .special import gammainc_lower

DEFAULT_MARGIN = 10
DEFAULT_MIN_SEG_LEN = 20
DEFAULT_THRESHOLD = 0.95


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """Sequence of symbol indices into ``alphabet``."""

    symbols: np.ndarray
    alphabet: tuple

    def __post_init__(self):
        sym = np.array(self.symbols, dtype=np.int64).ravel()
        alphabet = tuple(self.alphabet)
        if len(set(alphabet)) != len(alphabet) or not alphabet:
            raise DomainError("alphabet must be a non-empty list of distinct labels")
        if sym.size < 2:
            raise SequenceTooShort("a sequence needs at least two symbols")
        if sym.min() < 0 or sym.max() >= len(alphabet):
            raise DomainError("symbol index outside the alphabet")
        sym.setflags(write=False)
        object.__setattr__(self, "symbols", sym)
        object.__setattr__(self, "alphabet", alphabet)

    @classmethod
    def from_string(cls, text: str, alphabet: Optional[Sequence[str]] = None) -> SymbolSequence:
        """One character per symbol; alphabet defaults to the sorted set of characters."""
        if alphabet is None:
            alphabet = sorted(set(text))
        index = {c: i for i, c in enumerate(alphabet)}
        try:
            symbols = [index[c] for c in text]
        except KeyError as exc:
            raise DomainError(f"symbol {exc.args[0]!r} not in alphabet {''.join(alphabet)!r}") from None
        return cls(np.array(symbols, dtype=np.int64), tuple(alphabet))

    def __len__(self) -> int:
        return self.symbols.size

    def __str__(self) -> str:
        return "".join(str(self.alphabet[i]) for i in self.symbols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolSequence):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.symbols, other.symbols)

    def __hash__(self) -> int:
        return hash((self.alphabet, self.symbols.tobytes()))

    def reversed(self) -> SymbolSequence:
        return SymbolSequence(self.symbols[::-1], self.alphabet)


@dataclass(frozen=True)
class CursorStat:
    ell: int
    left_freq: ProbDist
    right_freq: ProbDist
    value: float


@dataclass(frozen=True)
class SignificanceParams:
    L: int
    N: int
    m: int = 2

    def __post_init__(self):
        if self.L < 1 or self.N < 1:
            raise DomainError("sequence length and alphabet size must be positive")
        if self.m < 2:
            raise DomainError("need at least two subsequences")
        if self.nu < 1:
            raise DomainError("degrees of freedom must be at least 1")

    @property
    def nu(self) -> int:
        return (self.N - 1) * (self.m - 1)


@dataclass(frozen=True)
class Cut:
    pos: int
    d_prime: float
    significance: float
    depth: int = 0


@dataclass(frozen=True)
class SegmentationResult:
    cuts: tuple[Cut, ...]
    threshold: float
    alpha: float
    min_seg_len: int
    margin: int = DEFAULT_MARGIN

    @property
    def positions(self) -> list[int]:
        return [c.pos for c in self.cuts]

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "threshold": self.threshold,
            "cuts": [
                {"pos": c.pos, "d_prime": c.d_prime, "significance": c.significance}
                for c in self.cuts
            ],
        }


def _check_alpha(alpha: float) -> float:
    if not (alpha > 0 and math.isfinite(alpha)):
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    return float(alpha)


def empirical_dist(seq: SymbolSequence, start: int, stop: int) -> ProbDist:
    """Relative symbol frequencies over ``seq[start:stop]``."""
    if start == stop:
        raise EmptyWindow(f"empty window [{start}, {stop})")
    if not 0 <= start < stop <= len(seq):
        raise DomainError(f"window [{start}, {stop}) outside sequence of length {len(seq)}")
    counts = np.bincount(seq.symbols[start:stop], minlength=len(seq.alphabet))
    return ProbDist.from_counts(counts)


def jsd_profile(symbols: np.ndarray, n_symbols: int) -> np.ndarray:
    """Weighted JSD (bits) at every cursor ``ell = 1 .. L-1``.

    ``symbols`` is ``(L,)`` or a batch ``(B, L)`` of equal-length integer
    sequences; the result has shape ``(L-1,)`` or ``(B, L-1)``.
    Exactly symmetric under reversing the sequence.
    """
    symbols = np.asarray(symbols)
    L = symbols.shape[-1]
    onehot = symbols[..., None] == np.arange(n_symbols)
    cum = np.cumsum(onehot, axis=-2, dtype=np.int64)
    total = cum[..., -1:, :]
    left = cum[..., :-1, :]
    right = total - left
    ell = np.arange(1, L, dtype=np.int64)[:, None]
    w_left = ell[:, 0] / L
    w_right = (L - ell[:, 0]) / L
    h_whole = entropy_rows(total / L)
    value = h_whole - (w_left * entropy_rows(left / ell) + w_right * entropy_rows(right / (L - ell)))
    # identical frequencies must give exactly zero, not rounding residue
    same = np.all(left * (L - ell) == right * ell, axis=-1)
    return np.where(same, 0.0, np.maximum(value, 0.0))


def d_prime(seq: SymbolSequence, ell: int, alpha: float) -> CursorStat:
    alpha = _check_alpha(alpha)
    L = len(seq)
    if not 1 <= ell <= L - 1:
        raise DomainError(f"cursor {ell} outside [1, {L - 1}]")
    f = empirical_dist(seq, 0, ell)
    g = empirical_dist(seq, ell, L)
    value = 0.0 if f == g else jsd_weighted(f, g, (ell / L, (L - ell) / L)) ** alpha
    return CursorStat(ell, f, g, value)


def significance(x: float, alpha: float, params: SignificanceParams) -> float:
    """Probability that a homogeneous sequence gives ``d'_alpha <= x``.

    Chi-square approximation ``P(nu/2, L ln2 x^(1/alpha))`` with ``P`` the
    regularized lower incomplete gamma. ``x^(1/alpha)`` recovers the
    underlying JSD, so the result does not depend on ``alpha`` for a given
    cut.
    """
    alpha = _check_alpha(alpha)
    if not x >= 0:
        raise DomainError(f"statistic must be nonnegative, got {x!r}")
    z = params.L * LN2 * x ** (1.0 / alpha)
    return min(1.0, max(0.0, gammainc_lower(params.nu / 2.0, z)))


def _scan(symbols: np.ndarray, n_symbols: int, margin: int) -> tuple[int, float]:
    L = symbols.size
    if margin < 1:
        raise DomainError("margin must be at least 1")
    if L < 2 * margin + 2:
        raise SequenceTooShort(f"length {L} too short for margin {margin}")
    profile = jsd_profile(symbols, n_symbols)
    window = profile[margin - 1 : L - margin]
    i = int(np.argmax(window))
    return margin + i, float(window[i])


def max_scan(seq: SymbolSequence, alpha: float, margin: int = DEFAULT_MARGIN) -> CursorStat:
    """Cursor in ``[margin, L - margin]`` with the largest ``d'_alpha``.

    The argmax is taken on the underlying JSD, so it is the same for every
    ``alpha``; ties go to the smallest cursor.
    """
    alpha = _check_alpha(alpha)
    ell, value = _scan(seq.symbols, len(seq.alphabet), margin)
    f = empirical_dist(seq, 0, ell)
    g = empirical_dist(seq, ell, len(seq))
    return CursorStat(ell, f, g, value**alpha)


def recursive_segment(
    seq: SymbolSequence,
    alpha: float,
    s0: float = DEFAULT_THRESHOLD,
    min_seg_len: int = DEFAULT_MIN_SEG_LEN,
    margin: int = DEFAULT_MARGIN,
) -> SegmentationResult:
    """Split recursively at the most significant cursor until nothing exceeds ``s0``.

    A segment is tested only when it is at least ``2 * min_seg_len`` long
    (and long enough for the margin). Significance uses the segment's own
    length and ``m = 2``. Cuts are returned in global coordinates, sorted by
    position; ``Cut.depth`` records the recursion level that produced each.
    """
    alpha = _check_alpha(alpha)
    if not 0 < s0 < 1:
        raise DomainError(f"threshold must lie in (0, 1), got {s0!r}")
    if min_seg_len < 2:
        raise DomainError("min_seg_len must be at least 2")
    n_symbols = len(seq.alphabet)
    cuts: list[Cut] = []
    stack = [(0, len(seq), 0)]
    while stack:
        start, stop, depth = stack.pop()
        length = stop - start
        if length < 2 * min_seg_len or length < 2 * margin + 2:
            continue
        ell, jsd_max = _scan(seq.symbols[start:stop], n_symbols, margin)
        value = jsd_max**alpha
        sig = significance(value, alpha, SignificanceParams(L=length, N=n_symbols, m=2))
        if sig > s0:
            cuts.append(Cut(start + ell, value, sig, depth))
            stack.append((start + ell, stop, depth + 1))
            stack.append((start, start + ell, depth + 1))
    cuts.sort(key=lambda c: c.pos)
    return SegmentationResult(tuple(cuts), float(s0), alpha, int(min_seg_len), int(margin))


def segment_many(
    seqs: Sequence[SymbolSequence],
    alpha: float,
    s0: float = DEFAULT_THRESHOLD,
    min_seg_len: int = DEFAULT_MIN_SEG_LEN,
    margin: int = DEFAULT_MARGIN,
    workers: Optional[int] = None,
) -> list[SegmentationResult]:
    """:func:`recursive_segment` over many sequences; results keep input order."""
    def run(s):
        return recursive_segment(s, alpha, s0, min_seg_len, margin)

    if workers is None or workers <= 1:
        return [run(s) for s in seqs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, seqs))


@dataclass(frozen=True)
class Block:
    start: int
    dist: ProbDist


@dataclass(frozen=True)
class EnsembleSpec:
    """``count`` sequences of ``length`` symbols, piecewise i.i.d. by block."""

    count: int
    length: int
    blocks: tuple[Block, ...]
    alphabet: tuple = field(default=None)

    def __post_init__(self):
        if self.count < 1 or self.length < 2:
            raise DomainError("need count >= 1 and length >= 2")
        blocks = tuple(sorted(self.blocks, key=lambda b: b.start))
        if not blocks or blocks[0].start != 0:
            raise DomainError("blocks must start at position 0")
        starts = [b.start for b in blocks]
        if len(set(starts)) != len(starts) or starts[-1] >= self.length:
            raise DomainError("block starts must be distinct and inside the sequence")
        dims = {len(b.dist) for b in blocks}
        if len(dims) != 1:
            raise InvalidDistribution("all blocks must use the same alphabet size")
        alphabet = self.alphabet
        if alphabet is None:
            alphabet = tuple(str(i) for i in range(dims.pop()))
        elif len(alphabet) != len(blocks[0].dist):
            raise DomainError("alphabet size does not match block distributions")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "alphabet", tuple(alphabet))

    @classmethod
    def two_block_default(cls) -> EnsembleSpec:
        """500 binary sequences of 1000 symbols, (0.8, 0.2) then (0.2, 0.8) at 500."""
        return cls(
            500,
            1000,
            (Block(0, ProbDist([0.8, 0.2])), Block(500, ProbDist([0.2, 0.8]))),
        )


def ensemble_array(spec: EnsembleSpec, seed: int) -> np.ndarray:
    """``(count, length)`` array of symbol indices.

    Row ``i`` is drawn from ``numpy.random.default_rng([seed, i])``, so every
    row is reproducible on its own and independent of the others.
    """
    out = np.empty((spec.count, spec.length), dtype=np.int64)
    bounds = [b.start for b in spec.blocks] + [spec.length]
    cdfs = [np.cumsum(b.dist.probs) for b in spec.blocks]
    top = len(spec.alphabet) - 1
    for i in range(spec.count):
        u = np.random.default_rng([seed, i]).random(spec.length)
        for k, cdf in enumerate(cdfs):
            a, b = bounds[k], bounds[k + 1]
            out[i, a:b] = np.minimum(np.searchsorted(cdf, u[a:b], side="right"), top)
    return out


def generate_ensemble(spec: EnsembleSpec, seed: int) -> list[SymbolSequence]:
    return [SymbolSequence(row, spec.alphabet) for row in ensemble_array(spec, seed)]


def _stack(ensemble: Iterable[SymbolSequence]) -> tuple[np.ndarray, int]:
    seqs = list(ensemble)
    if not seqs:
        raise DomainError("empty ensemble")
    lengths = {len(s) for s in seqs}
    if len(lengths) != 1:
        raise DomainError("all sequences in an ensemble must have the same length")
    n_symbols = max(len(s.alphabet) for s in seqs)
    return np.stack([s.symbols for s in seqs]), n_symbols


def average_profile(ensemble: Iterable[SymbolSequence], alpha: float) -> np.ndarray:
    """Mean ``d'_alpha(ell)`` over the ensemble, as ``(ell, mean)`` rows for ``ell = 1 .. L-1``."""
    alpha = _check_alpha(alpha)
    symbols, n_symbols = _stack(ensemble)
    mean = np.mean(jsd_profile(symbols, n_symbols) ** alpha, axis=0)
    ells = np.arange(1, symbols.shape[1])
    return np.column_stack([ells, mean])


def mean_max_dprime(
    ensemble: Iterable[SymbolSequence],
    alphas: Sequence[float],
    margin: int = DEFAULT_MARGIN,
) -> np.ndarray:
    """``(alpha, mean over sequences of max_ell d'_alpha)`` rows."""
    symbols, n_symbols = _stack(ensemble)
    L = symbols.shape[1]
    if L < 2 * margin + 2:
        raise SequenceTooShort(f"length {L} too short for margin {margin}")
    maxima = jsd_profile(symbols, n_symbols)[:, margin - 1 : L - margin].max(axis=1)
    return np.array([[a, np.mean(maxima ** _check_alpha(a))] for a in alphas])
