"""Build a codebook, store it, and push a file through encode/decode frames.

Run: python3 demos/file_roundtrip.py
"""
import io
import os
import tempfile

import numpy as np

from mpdm import build_codebook, load_codebook, quantize_pmf, save_codebook
from mpdm.fileio import decode_stream, encode_stream

c_typ = quantize_pmf([0.4415, 0.3209, 0.1654, 0.0722], 10)
cb = build_codebook(c_typ, c_typ.pmf())

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "cb.json")
    save_codebook(cb, path)
    loaded = load_codebook(path)
    print(f"descriptor: {os.path.getsize(path)} bytes, k={loaded.k}, {len(loaded.pairs)} pairs")

data = np.random.default_rng(1).integers(0, 256, 20000, dtype=np.uint8).tobytes()
frame = io.BytesIO()
blocks = encode_stream(loaded, data, frame)
print(f"{len(data)} bytes -> {blocks} blocks of {cb.n} amplitudes, frame {len(frame.getvalue())} bytes")
print("amplitude frequencies:", np.round(np.bincount(np.frombuffer(frame.getvalue()[40:-4], np.uint8)) / (blocks * cb.n), 4))

frame.seek(0)
assert decode_stream(loaded, frame) == data
print("decoded frame is byte-identical to the input")
