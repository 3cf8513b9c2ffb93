"""Domain types and exact combinatorics over compositions.

Amplitudes are referred to by 0-based index into the ordered alphabet; the
numeric amplitude values only matter for channel evaluation (see ``air``).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class CompositionMismatchError(ValueError):
    """A sequence does not have the composition a codec expects."""


class UnaddressableSequenceError(ValueError):
    """A sequence has a valid composition but lies outside the used codebook."""


class UnknownCompositionError(ValueError):
    """A sequence's composition is not used by the codebook."""


@dataclass(frozen=True)
class Pmf:
    """Probability vector over an ordered amplitude alphabet."""

    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if len(probs) < 1:
            raise ValueError("a PMF needs at least one entry")
        if any(not math.isfinite(p) or p < 0 for p in probs):
            raise ValueError(f"PMF entries must be finite and nonnegative: {probs}")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValueError(f"PMF does not sum to 1 (sum={math.fsum(probs)!r})")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def normalized(cls, weights: Iterable[float]) -> "Pmf":
        w = np.asarray(list(weights), dtype=float)
        total = w.sum()
        if not np.isfinite(total) or total <= 0:
            raise ValueError("weights must have a positive finite sum")
        p = w / total
        # push the rounding residue onto the largest entry so the sum is exact enough
        p[np.argmax(p)] += 1.0 - math.fsum(p)
        return cls(tuple(p))

    def __len__(self) -> int:
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)


@dataclass(frozen=True)
class Composition:
    """Occurrence counts of each amplitude in a length-``n`` sequence."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) < 1:
            raise ValueError("a composition needs at least one entry")
        if any(c < 0 for c in counts):
            raise ValueError(f"composition counts must be nonnegative: {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)

    def __getitem__(self, i):
        return self.counts[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)

    def pmf(self) -> Pmf:
        """The type (empirical distribution) of this composition."""
        n = self.n
        if n == 0:
            raise ValueError("empty composition has no type")
        return Pmf(tuple(c / n for c in self.counts))

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.counts)) + "}"


def as_pmf(p) -> Pmf:
    return p if isinstance(p, Pmf) else Pmf(tuple(p))


def as_composition(c) -> Composition:
    return c if isinstance(c, Composition) else Composition(tuple(c))


def entropy(p) -> float:
    """Entropy in bits, with 0 log 0 = 0."""
    probs = as_pmf(p).as_array()
    nz = probs[probs > 0]
    return 0.0 - float((nz * np.log2(nz)).sum())


def quantize_pmf(p, n: int) -> Composition:
    """Integer composition of ``n`` whose type minimizes D(type || p).

    The divergence is separable and convex in each count, so taking the ``n``
    cheapest unit increments is optimal. Equal increments go to the higher
    amplitude index first, which yields the lexicographically smallest
    minimizer.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    probs = as_pmf(p).probs
    counts = [0] * len(probs)
    neg_log_p = [-math.log(q) if q > 0 else math.inf for q in probs]

    def step_cost(i: int) -> float:
        # increase of n * D when count i goes c -> c+1, up to a shared -ln(n)
        c = counts[i] + 1
        h = c * math.log(c) - ((c - 1) * math.log(c - 1) if c > 1 else 0.0)
        return h + neg_log_p[i]

    heap = [(step_cost(i), -i) for i, q in enumerate(probs) if q > 0]
    heapq.heapify(heap)
    for _ in range(n):
        _, neg_i = heapq.heappop(heap)
        i = -neg_i
        counts[i] += 1
        heapq.heappush(heap, (step_cost(i), neg_i))
    return Composition(tuple(counts))


def multinomial(c) -> int:
    """Number of distinct sequences with composition ``c`` (exact)."""
    remaining = 0
    result = 1
    for count in as_composition(c).counts:
        remaining += count
        result *= math.comb(remaining, count)
    return result


def floor_log2(v: int) -> int:
    """Largest k with 2**k <= v."""
    v = int(v)
    if v < 1:
        raise ValueError("floor_log2 needs v >= 1")
    return v.bit_length() - 1


def num_compositions(n: int, a: int) -> int:
    """Number of compositions of ``n`` into ``a`` ordered nonnegative parts."""
    if n < 0 or a < 1:
        raise ValueError("need n >= 0 and a >= 1")
    return math.comb(n + a - 1, n)


def sequence_composition(seq: Sequence[int], a: int) -> Composition:
    """Histogram of an amplitude-index sequence over an alphabet of size ``a``."""
    arr = np.asarray(seq, dtype=np.int64).ravel()
    if arr.size and (arr.min() < 0 or arr.max() >= a):
        bad = arr[(arr < 0) | (arr >= a)][0]
        raise ValueError(f"symbol {bad} outside alphabet of size {a}")
    return Composition(tuple(np.bincount(arr, minlength=a).tolist()))


def log2_multinomial(counts: np.ndarray) -> np.ndarray:
    """Floating log2 of multinomial coefficients, row-wise over ``counts``."""
    from scipy.special import gammaln

    counts = np.asarray(counts, dtype=float)
    n = counts.sum(axis=-1)
    return (gammaln(n + 1) - gammaln(counts + 1).sum(axis=-1)) / math.log(2)


def floor_log2_multinomial(counts: np.ndarray, margin: float = 1e-6) -> np.ndarray:
    """Exact floor(log2 N(c)) per row; rows near an integer are recomputed exactly."""
    counts = np.atleast_2d(np.asarray(counts, dtype=np.int64))
    est = log2_multinomial(counts)
    out = np.floor(est).astype(np.int64)
    frac = est - out
    close = np.flatnonzero((frac < margin) | (frac > 1 - margin))
    for i in close:
        out[i] = floor_log2(multinomial(counts[i].tolist()))
    return out
