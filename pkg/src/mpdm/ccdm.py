"""Constant-composition matcher as exact lexicographic multiset-permutation ranking.

Unranking with exact running multinomials gives the same map as an
infinite-precision arithmetic-coding matcher, with no precision analysis
needed. Bits are read most-significant first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _limbs
from .core import (
    Composition,
    CompositionMismatchError,
    UnaddressableSequenceError,
    as_composition,
    floor_log2,
    multinomial,
)


def unrank(c, index: int) -> np.ndarray:
    """The ``index``-th sequence (lexicographic) with composition ``c``."""
    counts = list(as_composition(c).counts)
    r = sum(counts)
    total = multinomial(counts)
    index = int(index)
    if not 0 <= index < total:
        raise IndexError(f"index {index} outside [0, {total})")
    out = np.empty(r, dtype=np.uint8)
    for pos in range(r):
        # sequences starting with symbol s occupy [total*acc/r, total*(acc+c_s)/r)
        t = index * r // total
        acc = 0
        s = 0
        while t >= acc + counts[s]:
            acc += counts[s]
            s += 1
        if acc:
            index -= total * acc // r
        total = total * counts[s] // r
        counts[s] -= 1
        r -= 1
        out[pos] = s
    return out


def rank(seq: Sequence[int], c) -> int:
    """Inverse of :func:`unrank`."""
    comp = as_composition(c)
    a = len(comp)
    seq = [int(x) for x in np.asarray(seq).ravel()]
    if len(seq) != comp.n or any(not 0 <= x < a for x in seq):
        raise CompositionMismatchError(f"sequence does not have composition {comp}")
    cnt = [0] * a
    suffix_mult = 1
    index = 0
    r = 0
    for x in reversed(seq):
        r += 1
        cnt[x] += 1
        if cnt[x] > comp.counts[x]:
            raise CompositionMismatchError(f"sequence does not have composition {comp}")
        suffix_mult = suffix_mult * r // cnt[x]
        smaller = sum(cnt[:x])
        if smaller:
            index += suffix_mult * smaller // r
    return index


def bits_to_int(bits) -> int:
    value = 0
    for b in np.asarray(bits, dtype=np.uint8).ravel():
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> np.ndarray:
    if width == 0:
        return np.zeros(0, dtype=np.uint8)
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


@dataclass(frozen=True)
class CcdmCodec:
    """Constant-composition matcher for one composition.

    Uses the lexicographically first ``2**k`` sequences of the type class,
    ``k = floor(log2 N(c))``.
    """

    composition: Composition
    total: int = field(init=False, repr=False)
    k: int = field(init=False)

    def __post_init__(self):
        comp = as_composition(self.composition)
        object.__setattr__(self, "composition", comp)
        object.__setattr__(self, "total", multinomial(comp))
        object.__setattr__(self, "k", floor_log2(self.total))

    @property
    def n(self) -> int:
        return self.composition.n

    def encode_int(self, value: int) -> np.ndarray:
        if not 0 <= value < 1 << self.k:
            raise ValueError(f"value outside the {self.k}-bit input range")
        return unrank(self.composition, value)

    def decode_int(self, seq) -> int:
        seq = np.asarray(seq)
        if seq.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} sequence")
        index = rank(seq, self.composition)
        if index >> self.k:
            raise UnaddressableSequenceError(
                f"sequence has rank {index} >= 2**{self.k}; it is not a codeword"
            )
        return index

    def encode(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        if bits.size != self.k:
            raise ValueError(f"expected {self.k} input bits, got {bits.size}")
        return self.encode_int(bits_to_int(bits))

    def decode(self, seq) -> np.ndarray:
        return int_to_bits(self.decode_int(seq), self.k)

    def encode_batch(self, bits: np.ndarray) -> np.ndarray:
        """Encode rows of ``k`` bits; returns a ``(rows, n)`` uint8 array."""
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 2 or bits.shape[1] != self.k:
            raise ValueError(f"expected an array of shape (rows, {self.k})")
        return _unrank_rows(self.composition, self.total, bits)

    def decode_batch(self, seqs: np.ndarray) -> np.ndarray:
        """Decode rows of ``n`` amplitude indices back to rows of ``k`` bits."""
        seqs = np.asarray(seqs)
        if seqs.ndim != 2 or seqs.shape[1] != self.n:
            raise ValueError(f"expected an array of shape (rows, {self.n})")
        hist = histograms(seqs, len(self.composition))
        bad = np.flatnonzero((hist != self.composition.as_array()).any(axis=1))
        if bad.size:
            raise CompositionMismatchError(f"block {bad[0]} does not have composition {self.composition}")
        index = _rank_rows(seqs.astype(np.uint8), len(self.composition), self.total)
        over = np.flatnonzero(~_limbs.limbs_fit(index, self.k))
        if over.size:
            raise UnaddressableSequenceError(f"block {over[0]} is not a codeword")
        return _limbs.limbs_to_bits(index, self.k)


def histograms(seqs: np.ndarray, a: int, first_block: int = 0) -> np.ndarray:
    """Row-wise composition of a 2-D array of amplitude indices."""
    seqs = np.asarray(seqs, dtype=np.int64)
    rows = seqs.shape[0]
    if seqs.size and (seqs.min() < 0 or seqs.max() >= a):
        bad = np.flatnonzero(((seqs < 0) | (seqs >= a)).any(axis=1))[0]
        raise ValueError(f"block {first_block + bad} has a symbol outside the alphabet of size {a}")
    flat = seqs + a * np.arange(rows)[:, None]
    return np.bincount(flat.ravel(), minlength=rows * a).reshape(rows, a)


def _unrank_rows(comp: Composition, total: int, bits: np.ndarray) -> np.ndarray:
    nlimbs = _limbs.limbs_for(total)
    index = _limbs.bits_to_limbs(bits, nlimbs)
    out = np.empty((bits.shape[0], comp.n), dtype=np.uint8)
    if bits.shape[0]:
        _limbs.unrank_batch(index, comp.as_array(), _limbs.int_to_limbs(total, nlimbs), out)
    return out


def _rank_rows(seqs: np.ndarray, a: int, total: int) -> np.ndarray:
    nlimbs = _limbs.limbs_for(total)
    index = np.zeros((seqs.shape[0], nlimbs), dtype=np.uint64)
    hist = np.zeros((seqs.shape[0], a), dtype=np.int64)
    if seqs.shape[0]:
        _limbs.rank_batch(seqs, a, index, hist)
    return index


def ccdm_encode(codec: CcdmCodec, bits) -> np.ndarray:
    return codec.encode(bits)


def ccdm_decode(codec: CcdmCodec, seq) -> np.ndarray:
    return codec.decode(seq)
