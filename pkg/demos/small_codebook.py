"""Walk through the length-10 matcher for a four-amplitude target.

Run: python3 demos/small_codebook.py
"""
import numpy as np

from mpdm import CcdmCodec, build_codebook, entropy, enumerate_pairs, quantize_pmf

target = [0.4415, 0.3209, 0.1654, 0.0722]
c_typ = quantize_pmf(target, 10)
h = entropy(c_typ.pmf())
print(f"target {target} quantizes at n=10 to {c_typ}, entropy {h:.4f} bit")

# A constant-composition matcher uses only sequences of c_typ itself.
ccdm = CcdmCodec(c_typ)
print(f"CCDM: {ccdm.total} sequences -> k={ccdm.k}, rate {ccdm.k / 10}, loss {h - ccdm.k / 10:.4f}")

# Pairing each composition C with 2*c_typ - C keeps the average composition
# at c_typ while adding many more sequences.
pairs = enumerate_pairs(c_typ)
usable = sum(p.usable for p in pairs)
print(f"{len(pairs)} complementary pairs, {usable} power-of-two usable sequences")

cb = build_codebook(c_typ)
print(f"MPDM: k={cb.k}, rate {cb.rate}, loss {h - cb.rate:.4f}, {len(cb.pairs)} pairs selected")
for sp in cb.pairs:
    members = f"{sp.pair.c}" if sp.pair.degenerate else f"{sp.pair.c} + {sp.pair.c_bar}"
    print(f"  prefix {sp.prefix:<5} k_l={sp.k_l}  {members}")

rng = np.random.default_rng(0)
word = rng.integers(0, 2, cb.k, dtype=np.uint8)
seq = cb.encode(word)
print("word     ", "".join(map(str, word)))
print("codeword ", seq.tolist(), "composition", np.bincount(seq, minlength=4).tolist())
assert np.array_equal(cb.decode(seq), word)
print("decoded back from the histogram and the rank of the sequence")
