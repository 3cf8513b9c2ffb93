"""Pairwise binary-tree multiset-partition distribution matching.

Output sequences come in complementary composition pairs ``C + C_bar = 2 C_typ``
used equally often, so the ensemble of all codewords has composition
``2**k * C_typ``. Every pair addresses a power-of-two number of sequences,
which lets a canonical prefix code of length ``k - k_l`` pick the pair and a
constant-composition matcher map the rest of the word.
"""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _limbs
from .ccdm import _rank_rows, _unrank_rows, bits_to_int, histograms, int_to_bits, rank, unrank
from .core import (
    Composition,
    Pmf,
    UnaddressableSequenceError,
    UnknownCompositionError,
    as_composition,
    entropy,
    floor_log2,
    floor_log2_multinomial,
    multinomial,
    num_compositions,
)


@dataclass(frozen=True)
class CompositionPair:
    """Complementary compositions ``c`` and ``c_bar``, normalized so ``c <= c_bar``."""

    c: Composition
    c_bar: Composition
    k_l: int

    @property
    def degenerate(self) -> bool:
        return self.c == self.c_bar

    @property
    def usable(self) -> int:
        return 1 << self.k_l

    def permutations(self) -> int:
        """Unfloored pair permutation count."""
        if self.degenerate:
            return multinomial(self.c)
        return 2 * min(multinomial(self.c), multinomial(self.c_bar))


def valid_compositions(c_typ) -> np.ndarray:
    """All compositions C with ``0 <= C_i <= 2 c_typ_i`` and ``sum C = n``.

    Rows come out in lexicographic order.
    """
    bound = 2 * as_composition(c_typ).as_array()
    n = int(bound.sum() // 2)
    a = len(bound)
    rest = np.concatenate([np.cumsum(bound[::-1])[::-1][1:], [0]])
    rows = np.zeros((1, 0), dtype=np.int64)
    partial = np.zeros(1, dtype=np.int64)
    for i in range(a):
        lo = np.maximum(0, n - partial - rest[i])
        hi = np.minimum(bound[i], n - partial)
        span = hi - lo + 1
        keep = span > 0
        rows, partial, lo, span = rows[keep], partial[keep], lo[keep], span[keep]
        rep = np.repeat(np.arange(len(rows)), span)
        offset = np.arange(rep.size) - np.repeat(np.cumsum(span) - span, span)
        value = lo[rep] + offset
        rows = np.column_stack([rows[rep], value])
        partial = partial[rep] + value
    return rows


def inclusion_exclusion_terms(c_typ) -> list[dict[tuple[int, ...], int]]:
    """Per-level terms of the inclusion-exclusion count of valid compositions.

    Level ``j`` maps each ``j``-subset of amplitudes to the number of
    compositions of ``n`` violating the bound ``2 c_typ_i`` on every amplitude
    of the subset. Zero terms are dropped.
    """
    comp = as_composition(c_typ)
    n, a = comp.n, len(comp)
    levels = []
    for size in range(a + 1):
        level = {}
        for subset in itertools.combinations(range(a), size):
            excess = n - sum(2 * comp[i] + 1 for i in subset)
            if excess >= 0:
                level[subset] = num_compositions(excess, a)
        levels.append(level)
    return levels


def count_valid_compositions(c_typ) -> int:
    """Number of pairable compositions, by inclusion-exclusion (no enumeration)."""
    return sum(
        (-1) ** size * sum(level.values())
        for size, level in enumerate(inclusion_exclusion_terms(c_typ))
    )


@dataclass(frozen=True)
class PairTable:
    """All complementary pairs of a typical composition as arrays.

    Rows are ordered lexicographically by the smaller member ``first``.
    """

    c_typ: Composition
    first: np.ndarray
    second: np.ndarray
    k_l: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return (self.first == self.second).all(axis=1)

    def __len__(self) -> int:
        return len(self.k_l)

    def pair(self, i: int) -> CompositionPair:
        return CompositionPair(
            Composition(tuple(self.first[i].tolist())),
            Composition(tuple(self.second[i].tolist())),
            int(self.k_l[i]),
        )


def pair_table(c_typ) -> PairTable:
    comp = as_composition(c_typ)
    comps = valid_compositions(comp)
    partner = 2 * comp.as_array() - comps
    # keep the member that is lexicographically not larger than its partner
    diff = partner - comps
    nz = diff != 0
    first_nz = np.where(nz.any(axis=1), diff[np.arange(len(diff)), nz.argmax(axis=1)], 0)
    keep = first_nz >= 0
    first, second = comps[keep], partner[keep]
    f1 = floor_log2_multinomial(first)
    f2 = floor_log2_multinomial(second)
    degenerate = (first == second).all(axis=1)
    k_l = np.where(degenerate, f1, 1 + np.minimum(f1, f2))
    return PairTable(comp, first, second, k_l)


def enumerate_pairs(c_typ) -> list[CompositionPair]:
    table = pair_table(c_typ)
    return [table.pair(i) for i in range(len(table))]


def total_pairwise_permutations(pairs) -> int:
    """Sum of unfloored pair permutation counts."""
    return sum(p.permutations() for p in pairs)


def _selection(k_l: np.ndarray) -> tuple[int, np.ndarray]:
    """Input length and selected rows, in selection order.

    Pairs are ranked by usable count (descending, stable so ties stay in
    lexicographic order) and taken greedily until they fill ``2**k`` exactly.
    """
    order = np.argsort(-k_l, kind="stable")
    levels, level_counts = np.unique(k_l, return_counts=True)
    total = sum(int(c) << int(lv) for lv, c in zip(levels, level_counts))
    k = floor_log2(total)
    target = 1 << k
    acc = 0
    chosen = []
    for i in order:
        u = 1 << int(k_l[i])
        if acc + u > target:
            continue
        acc += u
        chosen.append(i)
        if acc == target:
            break
    return k, np.array(chosen, dtype=np.int64)


@lru_cache(maxsize=4096)
def _input_bits(c_typ: tuple[int, ...]) -> int:
    return _selection(pair_table(c_typ).k_l)[0]


def mpdm_input_bits(c_typ) -> int:
    """Input length ``k`` of the binary-tree MPDM for ``c_typ`` (cached)."""
    return _input_bits(as_composition(c_typ).counts)


def ccdm_input_bits(c_typ) -> int:
    return floor_log2(multinomial(c_typ))


def canonical_prefixes(lengths) -> list[str]:
    """Canonical prefix code for nondecreasing code lengths satisfying Kraft."""
    codes = []
    code = 0
    prev = None
    for length in lengths:
        if prev is not None:
            code = (code + 1) << (length - prev)
        if code >> length:
            raise ValueError("code lengths violate the Kraft inequality")
        codes.append(format(code, f"0{length}b") if length else "")
        prev = length
    return codes


@dataclass(frozen=True)
class SelectedPair:
    pair: CompositionPair
    prefix: str

    @property
    def prefix_length(self) -> int:
        return len(self.prefix)

    @property
    def k_l(self) -> int:
        return self.pair.k_l


@dataclass(frozen=True)
class MpdmCodebook:
    """A constructed matcher: selected pairs with their prefixes.

    Words are ``k`` bits, most-significant first: prefix, then (for a
    non-degenerate pair) one member bit where 0 picks ``c``, then the
    constant-composition payload.
    """

    k: int
    c_typ: Composition
    pairs: tuple[SelectedPair, ...]
    pmf: Pmf | None = None
    _starts: list[int] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)
    _totals: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        starts = [int(sp.prefix, 2) << sp.k_l if sp.prefix else 0 for sp in self.pairs]
        if starts != sorted(starts):
            raise ValueError("prefixes must be listed in canonical order")
        index = {}
        for i, sp in enumerate(self.pairs):
            index[sp.pair.c.counts] = (i, 0)
            if not sp.pair.degenerate:
                index[sp.pair.c_bar.counts] = (i, 1)
        if len(index) != sum(1 if sp.pair.degenerate else 2 for sp in self.pairs):
            raise ValueError("a composition appears in more than one selected pair")
        object.__setattr__(self, "_starts", starts)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_totals", {})

    @property
    def n(self) -> int:
        return self.c_typ.n

    @property
    def alphabet_size(self) -> int:
        return len(self.c_typ)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def prefix_index(self) -> dict[tuple[int, ...], tuple[int, int]]:
        """Composition counts -> (pair position, member bit)."""
        return dict(self._index)

    def kraft_sum(self) -> Fraction:
        return sum((Fraction(1, 2 ** sp.prefix_length) for sp in self.pairs), Fraction(0))

    def member(self, i: int, bit: int) -> Composition:
        pair = self.pairs[i].pair
        return pair.c_bar if bit else pair.c

    def _payload_bits(self, i: int) -> int:
        sp = self.pairs[i]
        return sp.k_l if sp.pair.degenerate else sp.k_l - 1

    def _total(self, comp: Composition) -> int:
        total = self._totals.get(comp.counts)
        if total is None:
            total = self._totals[comp.counts] = multinomial(comp)
        return total

    def encode_int(self, value: int) -> np.ndarray:
        if not 0 <= value < 1 << self.k:
            raise ValueError(f"value outside the {self.k}-bit input range")
        i = bisect.bisect_right(self._starts, value) - 1
        rem = value - self._starts[i]
        sp = self.pairs[i]
        assert rem < sp.pair.usable, "prefix table is not Kraft-tight"
        if sp.pair.degenerate:
            return unrank(sp.pair.c, rem)
        bit = rem >> (sp.k_l - 1)
        return unrank(self.member(i, bit), rem & ((1 << (sp.k_l - 1)) - 1))

    def decode_int(self, seq) -> int:
        seq = np.asarray(seq)
        if seq.ndim != 1 or seq.shape[0] != self.n:
            raise ValueError(f"expected a length-{self.n} sequence")
        if seq.size and (seq.min() < 0 or seq.max() >= self.alphabet_size):
            raise ValueError("symbol outside the alphabet")
        counts = tuple(np.bincount(seq.astype(np.int64), minlength=self.alphabet_size).tolist())
        try:
            i, bit = self._index[counts]
        except KeyError:
            raise UnknownCompositionError(
                f"composition {Composition(counts)} is not used by this codebook"
            ) from None
        payload = rank(seq, counts)
        width = self._payload_bits(i)
        if payload >> width:
            raise UnaddressableSequenceError(f"sequence has rank {payload} >= 2**{width}")
        return self._starts[i] + (bit << width) + payload

    def encode(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        if bits.size != self.k:
            raise ValueError(f"expected {self.k} input bits, got {bits.size}")
        return self.encode_int(bits_to_int(bits))

    def decode(self, seq) -> np.ndarray:
        return int_to_bits(self.decode_int(seq), self.k)

    def _pair_of_rows(self, bits: np.ndarray) -> np.ndarray:
        pmax = max(sp.prefix_length for sp in self.pairs)
        if pmax <= 62:
            weights = np.uint64(1) << np.arange(pmax - 1, -1, -1, dtype=np.uint64)
            top = (bits[:, :pmax].astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
            starts = np.array(
                [int(sp.prefix, 2) << (pmax - sp.prefix_length) if sp.prefix else 0 for sp in self.pairs],
                dtype=np.uint64,
            )
            return np.searchsorted(starts, top, side="right") - 1
        values = [bits_to_int(row) for row in bits]
        return np.array([bisect.bisect_right(self._starts, v) - 1 for v in values], dtype=np.int64)

    def encode_batch(self, bits: np.ndarray) -> np.ndarray:
        """Encode rows of ``k`` bits into rows of ``n`` amplitude indices."""
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 2 or bits.shape[1] != self.k:
            raise ValueError(f"expected an array of shape (rows, {self.k})")
        out = np.empty((bits.shape[0], self.n), dtype=np.uint8)
        if not bits.shape[0]:
            return out
        which = self._pair_of_rows(bits)
        for i in np.unique(which):
            rows = np.flatnonzero(which == i)
            sp = self.pairs[i]
            p = sp.prefix_length
            if sp.pair.degenerate:
                groups = [(rows, sp.pair.c, bits[rows, p:])]
            else:
                member = bits[rows, p]
                groups = [
                    (rows[member == b], self.member(i, b), bits[rows[member == b], p + 1:])
                    for b in (0, 1)
                ]
            for sel, comp, payload in groups:
                if sel.size:
                    out[sel] = _unrank_rows(comp, self._total(comp), payload)
        return out

    def decode_batch(self, seqs: np.ndarray, first_block: int = 0) -> np.ndarray:
        """Decode rows of amplitude indices; errors name the first bad block,
        counting rows from ``first_block``."""
        seqs = np.asarray(seqs)
        if seqs.ndim != 2 or seqs.shape[1] != self.n:
            raise ValueError(f"expected an array of shape (rows, {self.n})")
        out = np.zeros((seqs.shape[0], self.k), dtype=np.uint8)
        if not seqs.shape[0]:
            return out
        hist = histograms(seqs, self.alphabet_size, first_block)
        uniq, inverse = np.unique(hist, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        seqs = seqs.astype(np.uint8)
        for u, counts in enumerate(uniq):
            rows = np.flatnonzero(inverse == u)
            key = tuple(counts.tolist())
            if key not in self._index:
                raise UnknownCompositionError(
                    f"block {first_block + rows[0]}: composition {Composition(key)} is not used by this codebook"
                )
            i, bit = self._index[key]
            sp = self.pairs[i]
            width = self._payload_bits(i)
            index = _rank_rows(seqs[rows], self.alphabet_size, self._total(Composition(key)))
            over = np.flatnonzero(~_limbs.limbs_fit(index, width))
            if over.size:
                raise UnaddressableSequenceError(f"block {first_block + rows[over[0]]} is not a codeword")
            head = [int(ch) for ch in sp.prefix] + ([] if sp.pair.degenerate else [bit])
            out[np.ix_(rows, np.arange(len(head)))] = np.array(head, dtype=np.uint8)
            out[rows, len(head):] = _limbs.limbs_to_bits(index, width)
        return out


def build_codebook(c_typ, pmf: Pmf | None = None) -> MpdmCodebook:
    """Construct the pairwise binary-tree matcher for a typical composition."""
    comp = as_composition(c_typ)
    if comp.n < 1:
        raise ValueError("typical composition must have n >= 1")
    table = pair_table(comp)
    k, chosen = _selection(table.k_l)
    lengths = [k - int(table.k_l[i]) for i in chosen]
    prefixes = canonical_prefixes(lengths)
    pairs = tuple(SelectedPair(table.pair(int(i)), pre) for i, pre in zip(chosen, prefixes))
    return MpdmCodebook(k=k, c_typ=comp, pairs=pairs, pmf=pmf)


def mpdm_encode(cb: MpdmCodebook, bits) -> np.ndarray:
    return cb.encode(bits)


def mpdm_decode(cb: MpdmCodebook, seq) -> np.ndarray:
    return cb.decode(seq)


def rate_loss(k: int, n: int, p_target) -> float:
    """Entropy of the quantized target minus the matcher rate, bits per amplitude."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return entropy(p_target) - k / n
