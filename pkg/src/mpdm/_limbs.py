"""Fixed-width big-integer kernels for batch ranking/unranking.

Integers are little-endian arrays of 32-bit limbs held in ``uint64`` so that a
limb times a small factor (< 2**31) plus carry never overflows. The Python-int
routines in ``ccdm`` are the reference; these kernels only exist for
throughput and are tested against them.
"""
from __future__ import annotations

import numpy as np
from numba import njit

LIMB_BITS = 32
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)


def limbs_for(value: int) -> int:
    """Limb count able to hold ``value`` times a small factor, with one spare."""
    return max(1, -(-value.bit_length() // LIMB_BITS)) + 2


def int_to_limbs(value: int, nlimbs: int) -> np.ndarray:
    raw = int(value).to_bytes(4 * nlimbs, "little")
    return np.frombuffer(raw, dtype="<u4").astype(np.uint64)


def limbs_to_int(limbs: np.ndarray) -> int:
    return int.from_bytes(np.asarray(limbs, dtype="<u4").tobytes(), "little")


def bits_to_limbs(bits: np.ndarray, nlimbs: int) -> np.ndarray:
    """Rows of MSB-first bits -> rows of little-endian limbs."""
    bits = np.asarray(bits, dtype=np.uint8)
    rows, width = bits.shape
    total = LIMB_BITS * nlimbs
    if width > total:
        raise ValueError("bit rows wider than the limb buffer")
    padded = np.zeros((rows, total), dtype=np.uint8)
    padded[:, total - width:] = bits
    words = np.packbits(padded, axis=1).view(">u4")
    return np.ascontiguousarray(words[:, ::-1]).astype(np.uint64)


def limbs_to_bits(limbs: np.ndarray, width: int) -> np.ndarray:
    """Rows of little-endian limbs -> rows of ``width`` MSB-first bits."""
    be = np.ascontiguousarray(limbs[:, ::-1]).astype(">u4")
    bits = np.unpackbits(be.view(np.uint8), axis=1)
    return bits[:, bits.shape[1] - width:]


def limbs_fit(limbs: np.ndarray, width: int) -> np.ndarray:
    """Per row: is the value below 2**width."""
    be = np.ascontiguousarray(limbs[:, ::-1]).astype(">u4")
    bits = np.unpackbits(be.view(np.uint8), axis=1)
    return ~bits[:, : bits.shape[1] - width].any(axis=1)


@njit(cache=True)
def _mul_small(a, m, out, nl):
    # out[:nl+1] = a[:nl] * m
    carry = np.uint64(0)
    mm = np.uint64(m)
    for i in range(nl):
        t = a[i] * mm + carry
        out[i] = t & _MASK
        carry = t >> _SHIFT
    out[nl] = carry


@njit(cache=True)
def _div_small(a, d, out, nl):
    # out[:nl] = a[:nl] // d (exactness is the caller's business)
    rem = np.uint64(0)
    dd = np.uint64(d)
    for i in range(nl - 1, -1, -1):
        t = (rem << _SHIFT) | a[i]
        q = t // dd
        out[i] = q
        rem = t - q * dd


@njit(cache=True)
def _sub_inplace(a, b, nl):
    borrow = np.uint64(0)
    for i in range(nl):
        bi = b[i] + borrow
        if a[i] >= bi:
            a[i] = a[i] - bi
            borrow = np.uint64(0)
        else:
            a[i] = a[i] + (np.uint64(1) << _SHIFT) - bi
            borrow = np.uint64(1)


@njit(cache=True)
def _add_inplace(a, b, nl):
    carry = np.uint64(0)
    for i in range(nl):
        t = a[i] + b[i] + carry
        a[i] = t & _MASK
        carry = t >> _SHIFT
    i = nl
    while carry and i < a.shape[0]:
        t = a[i] + carry
        a[i] = t & _MASK
        carry = t >> _SHIFT
        i += 1


@njit(cache=True)
def _cmp(a, b, nl):
    for i in range(nl - 1, -1, -1):
        if a[i] != b[i]:
            return -1 if a[i] < b[i] else 1
    return 0


@njit(cache=True)
def _active(a, nl):
    while nl > 1 and a[nl - 1] == 0:
        nl -= 1
    return nl


@njit(cache=True)
def unrank_batch(index, counts, total, out):
    """Lexicographic unranking of each row of ``index`` into ``out``.

    ``total`` holds the multinomial coefficient of ``counts``; every index must
    be below it.
    """
    rows, nlimbs = index.shape
    a = counts.shape[0]
    n = out.shape[1]
    cur = np.zeros(nlimbs, np.uint64)
    tot = np.zeros(nlimbs, np.uint64)
    q = np.zeros(nlimbs, np.uint64)
    tmp = np.zeros(nlimbs, np.uint64)
    prev = np.zeros(nlimbs, np.uint64)
    c = np.zeros(a, np.int64)
    for w in range(rows):
        cur[:] = index[w]
        tot[:] = total
        c[:] = counts
        nl = _active(tot, nlimbs - 1)
        r = n
        for pos in range(n):
            _mul_small(cur, r, q, nl)
            prev[: nl + 1] = 0
            acc = 0
            s = -1
            # symbol s owns [total*acc/r, total*(acc+c_s)/r)
            for j in range(a):
                if c[j] == 0:
                    continue
                nxt = acc + c[j]
                _mul_small(tot, nxt, tmp, nl)
                if _cmp(q, tmp, nl + 1) < 0:
                    s = j
                    break
                acc = nxt
                prev[: nl + 1] = tmp[: nl + 1]
            _sub_inplace(q, prev, nl + 1)
            _div_small(q, r, cur, nl + 1)
            _mul_small(tot, c[s], tmp, nl)
            _div_small(tmp, r, tot, nl + 1)
            c[s] -= 1
            r -= 1
            nl = _active(tot, nl + 1)
            out[w, pos] = s


@njit(cache=True)
def rank_batch(seqs, a, index, hist):
    """Lexicographic rank of each row of ``seqs`` among sequences of its own
    composition; the composition is written to ``hist``."""
    rows, n = seqs.shape
    nlimbs = index.shape[1]
    mult = np.zeros(nlimbs, np.uint64)
    acc = np.zeros(nlimbs, np.uint64)
    tmp = np.zeros(nlimbs, np.uint64)
    tmp2 = np.zeros(nlimbs, np.uint64)
    cnt = np.zeros(a, np.int64)
    for w in range(rows):
        mult[:] = 0
        mult[0] = 1
        acc[:] = 0
        cnt[:] = 0
        nl = 1
        r = 0
        for pos in range(n - 1, -1, -1):
            x = seqs[w, pos]
            r += 1
            cnt[x] += 1
            # mult = multinomial of the suffix composition
            _mul_small(mult, r, tmp, nl)
            _div_small(tmp, cnt[x], mult, nl + 1)
            nl = _active(mult, nl + 1)
            smaller = 0
            for j in range(x):
                smaller += cnt[j]
            if smaller:
                _mul_small(mult, smaller, tmp, nl)
                _div_small(tmp, r, tmp2, nl + 1)
                _add_inplace(acc, tmp2, nl + 1)
        index[w] = acc
        hist[w] = cnt
