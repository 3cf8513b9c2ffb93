import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpdm.builder import (
    build_codebook,
    canonical_prefixes,
    count_valid_compositions,
    enumerate_pairs,
    inclusion_exclusion_terms,
    mpdm_decode,
    mpdm_encode,
    mpdm_input_bits,
    rate_loss,
    total_pairwise_permutations,
    valid_compositions,
)
from mpdm.ccdm import int_to_bits
from mpdm.core import (
    UnaddressableSequenceError,
    UnknownCompositionError,
    floor_log2,
    multinomial,
    quantize_pmf,
)
from oracles import all_compositions, dyadic_kraft, prefix_free, sorted_permutations

EX = (4, 3, 2, 1)


def brute_pairs(c_typ):
    """Unordered complementary pairs by scanning every composition of n."""
    twice = [2 * x for x in c_typ]
    seen = set()
    for c in all_compositions(sum(c_typ), len(c_typ)):
        bar = tuple(t - x for t, x in zip(twice, c))
        if min(bar) >= 0:
            seen.add(min(c, bar) + max(c, bar))
    a = len(c_typ)
    return sorted((p[:a], p[a:]) for p in seen)


def pair_bits(c, bar):
    if c == bar:
        return floor_log2(multinomial(c))
    return 1 + min(floor_log2(multinomial(c)), floor_log2(multinomial(bar)))


def all_words(k):
    return ((np.arange(1 << k)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)


def test_length10_counts():
    terms = inclusion_exclusion_terms(EX)
    assert terms[0] == {(): 286}
    assert terms[1] == {(0,): 4, (1,): 20, (2,): 56, (3,): 120}
    assert sum(terms[2].values()) == 11
    assert all(not level for level in terms[3:])
    assert count_valid_compositions(EX) == 97
    assert len(valid_compositions(EX)) == 97
    assert len(enumerate_pairs(EX)) == 49


def test_pairs_small_cases():
    assert len(enumerate_pairs((6, 0, 0))) == 1
    assert enumerate_pairs((6, 0, 0))[0].degenerate
    got = [(p.c.counts, p.c_bar.counts) for p in enumerate_pairs((2, 1, 1))]
    assert got == [
        ((0, 2, 2), (4, 0, 0)),
        ((1, 1, 2), (3, 1, 0)),
        ((1, 2, 1), (3, 0, 1)),
        ((2, 0, 2), (2, 2, 0)),
        ((2, 1, 1), (2, 1, 1)),
    ]
    assert count_valid_compositions((5,)) == 1
    assert count_valid_compositions((2, 1, 1)) == 9


def test_pairs_match_brute_force():
    for n in range(1, 15):
        for a in (1, 2, 3, 4):
            for c_typ in all_compositions(n, a):
                pairs = enumerate_pairs(c_typ)
                assert count_valid_compositions(c_typ) == 2 * len(pairs) - 1
                if n <= 9 or n % 4 == 0:
                    expect = brute_pairs(c_typ)
                    assert [(p.c.counts, p.c_bar.counts) for p in pairs] == expect
                    assert [p.k_l for p in pairs] == [pair_bits(c, b) for c, b in expect]


def test_total_pairwise_permutations():
    assert total_pairwise_permutations(enumerate_pairs(EX)) == 164214
    assert floor_log2(164214) == 17
    assert total_pairwise_permutations(enumerate_pairs((7,))) == 1
    # per pair 2*min(N, N_bar) or N for the degenerate one: 2 + 8 + 8 + 12 + 12
    assert total_pairwise_permutations(enumerate_pairs((2, 1, 1))) == 42


def test_length10_second_pair():
    assert multinomial((4, 2, 3, 1)) == 12600 and multinomial((4, 4, 1, 1)) == 6300
    pair = next(p for p in enumerate_pairs(EX) if p.c.counts == (4, 2, 3, 1))
    assert pair.c_bar.counts == (4, 4, 1, 1)
    assert pair.permutations() + multinomial(EX) == 25200


def test_length10_codebook():
    cb = build_codebook(EX)
    usable = sum(p.usable for p in enumerate_pairs(EX))
    assert usable == 122688
    assert cb.k == 16 == floor_log2(usable)
    assert len(cb.pairs) == 9
    assert sum(sp.pair.usable for sp in cb.pairs) == 2**16
    assert cb.kraft_sum() == 1
    assert [sp.prefix for sp in cb.pairs] == ["000", "001", "010", "011", "100", "101", "110", "1110", "1111"]
    degenerate = [sp for sp in cb.pairs if sp.pair.degenerate]
    # seven pairs reach 2**13, one of them C_typ itself; six plus four of 2**12 would need ten pairs
    assert [sp.prefix for sp in degenerate] == ["110"]
    assert rate_loss(cb.k, cb.n, cb.c_typ.pmf()) == pytest.approx(0.2464, abs=1e-4)


def test_length10_selection_is_forced():
    levels = sorted((p.k_l for p in enumerate_pairs(EX)), reverse=True)
    top = [k for k in levels if k == 13]
    assert len(top) == 7
    # without C_typ: the fewest pairs filling 2**16 exactly
    others = levels.copy()
    others.remove(13)
    acc, used = 0, 0
    for k in others:
        if acc + 2**k <= 2**16:
            acc += 2**k
            used += 1
    assert acc == 2**16 and used == 10


def test_single_amplitude_codebook():
    cb = build_codebook((5, 0, 0))
    assert cb.k == 0 and len(cb.pairs) == 1 and cb.pairs[0].prefix == ""
    assert cb.encode([]).tolist() == [0] * 5
    assert cb.decode([0] * 5).size == 0


def test_codebook_211_table():
    cb = build_codebook((2, 1, 1))
    assert cb.k == 5
    assert [sp.prefix for sp in cb.pairs] == ["00", "01", "10", "11"]
    assert all(sp.k_l == 3 for sp in cb.pairs)
    # tabulate all 32 words: prefix -> pair, member bit, then rank among sorted permutations
    pairs = [((1, 1, 2), (3, 1, 0)), ((1, 2, 1), (3, 0, 1)), ((2, 0, 2), (2, 2, 0))]
    table = {}
    for w in range(32):
        p, rest = w >> 3, w & 7
        if p < 3:
            member = pairs[p][rest >> 2]
            table[w] = sorted_permutations(member)[rest & 3]
        else:
            table[w] = sorted_permutations((2, 1, 1))[rest]
    for w, expect in table.items():
        bits = int_to_bits(w, 5)
        assert tuple(mpdm_encode(cb, bits)) == expect
        assert mpdm_decode(cb, expect).tolist() == bits.tolist()
    assert len(set(table.values())) == 32


def test_decode_errors():
    cb = build_codebook((2, 1, 1))
    with pytest.raises(UnknownCompositionError):
        mpdm_decode(cb, (0, 0, 0, 0))
    with pytest.raises(ValueError):
        mpdm_decode(cb, (0, 0, 1))
    with pytest.raises(UnaddressableSequenceError):
        mpdm_decode(cb, (2, 1, 0, 0))
    with pytest.raises(ValueError):
        mpdm_encode(build_codebook(EX), np.zeros(17, dtype=np.uint8))


def test_rate_loss_examples():
    assert rate_loss(13, 10, [0.4, 0.3, 0.2, 0.1]) == pytest.approx(0.55, abs=0.005)
    assert rate_loss(17, 10, [0.4, 0.3, 0.2, 0.1]) == pytest.approx(0.15, abs=0.005)
    assert rate_loss(15, 10, [0.5, 0.5]) == pytest.approx(-0.5)
    assert rate_loss(10, 10, [0.5, 0.5]) == 0.0


def test_canonical_prefixes():
    assert canonical_prefixes([1, 2, 3, 3]) == ["0", "10", "110", "111"]
    assert canonical_prefixes([0]) == [""]
    with pytest.raises(ValueError):
        canonical_prefixes([1, 1, 1])


def random_codebooks(count, seed, n_max=14, k_max=16):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a = int(rng.integers(2, 5))
        pmf = rng.dirichlet(np.ones(a))
        n = int(rng.integers(2, n_max + 1))
        cb = build_codebook(quantize_pmf(pmf, n))
        if cb.k <= k_max:
            out.append(cb)
    return out


@pytest.mark.parametrize("cb", random_codebooks(12, 11), ids=lambda cb: str(cb.c_typ))
def test_exhaustive_roundtrip_and_balance(cb):
    words = all_words(cb.k)
    seqs = cb.encode_batch(words)
    np.testing.assert_array_equal(cb.decode_batch(seqs), words)
    hist = np.array([np.bincount(s, minlength=cb.alphabet_size) for s in seqs])
    np.testing.assert_array_equal(hist.sum(axis=0), (1 << cb.k) * cb.c_typ.as_array())
    members = set(cb.prefix_index)
    assert {tuple(h) for h in hist} <= members
    assert len({s.tobytes() for s in seqs}) == len(seqs)
    for w in words[:: max(1, len(words) // 50)]:
        np.testing.assert_array_equal(cb.encode(w), seqs[int("".join(map(str, w)) or "0", 2)])
        np.testing.assert_array_equal(cb.decode(cb.encode(w)), w)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 15), min_size=1, max_size=4).filter(lambda c: sum(c) >= 1))
def test_codebook_invariants(c_typ):
    cb = build_codebook(c_typ)
    prefixes = [sp.prefix for sp in cb.pairs]
    assert dyadic_kraft(len(p) for p in prefixes) == 1
    assert prefix_free(prefixes)
    assert all(len(sp.prefix) + sp.k_l == cb.k for sp in cb.pairs)
    assert sum(sp.pair.usable for sp in cb.pairs) == 1 << cb.k
    assert cb.k >= floor_log2(multinomial(c_typ))
    assert cb.k == floor_log2(sum(p.usable for p in enumerate_pairs(c_typ)))
    k_ls = [sp.k_l for sp in cb.pairs]
    assert k_ls == sorted(k_ls, reverse=True)


def test_mpdm_beats_ccdm_input_bits():
    rng = np.random.default_rng(5)
    for _ in range(200):
        a = int(rng.integers(2, 5))
        n = int(rng.integers(1, 61))
        c_typ = np.bincount(rng.integers(0, a, n), minlength=a)
        assert mpdm_input_bits(c_typ) >= floor_log2(multinomial(c_typ))


def test_valid_compositions_are_lexicographic():
    rows = valid_compositions((3, 2, 2))
    keys = [tuple(r) for r in rows]
    assert keys == sorted(keys)
    assert keys == [c for c in itertools.product(range(7), range(5), range(5)) if sum(c) == 7]
