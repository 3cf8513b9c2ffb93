"""Codebook descriptors (JSON) and framed block streams (binary, CRC-32).

Frame layout, all integers big-endian::

    b"MPDM"  version:u8  kind:u8  n:u32  k:u32  |A|:u16  c_typ:u32*|A|  blocks:u64
    body
    crc32(body):u32

``kind`` 0 carries input words, ``k`` bits per block packed MSB-first over the
whole body; ``kind`` 1 carries codewords, one byte per amplitude index.
"""
from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .builder import CompositionPair, MpdmCodebook, SelectedPair
from .core import Composition, Pmf, floor_log2, multinomial

DESCRIPTOR_FORMAT = "mpdm-codebook"
DESCRIPTOR_VERSION = 1
MAGIC = b"MPDM"
FRAME_VERSION = 1
KIND_BITS = 0
KIND_SYMBOLS = 1

_HEAD = struct.Struct(">4sBBIIH")
_COUNT = struct.Struct(">Q")
_CRC = struct.Struct(">I")


class DescriptorError(ValueError):
    """A codebook descriptor could not be parsed or is inconsistent."""


class DataIntegrityError(ValueError):
    """A frame is truncated, corrupted or does not match the codebook."""


# ---------------------------------------------------------------- descriptors


def codebook_to_dict(cb: MpdmCodebook) -> dict:
    return {
        "format": DESCRIPTOR_FORMAT,
        "version": DESCRIPTOR_VERSION,
        "n": cb.n,
        "k": cb.k,
        "alphabet_size": cb.alphabet_size,
        "c_typ": list(cb.c_typ.counts),
        "pmf": list(cb.pmf.probs) if cb.pmf is not None else None,
        "pairs": [
            {
                "c": list(sp.pair.c.counts),
                "c_bar": list(sp.pair.c_bar.counts),
                "k_l": sp.k_l,
                "prefix": sp.prefix,
                "degenerate": sp.pair.degenerate,
            }
            for sp in cb.pairs
        ],
    }


def dumps_codebook(cb: MpdmCodebook) -> str:
    return json.dumps(codebook_to_dict(cb), indent=1) + "\n"


def save_codebook(cb: MpdmCodebook, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_codebook(cb))


def _int_list(value, name: str, length: int | None = None) -> tuple[int, ...]:
    if not isinstance(value, list) or not all(type(v) is int and v >= 0 for v in value):
        raise DescriptorError(f"{name} must be a list of nonnegative integers")
    if length is not None and len(value) != length:
        raise DescriptorError(f"{name} must have {length} entries")
    return tuple(value)


def codebook_from_dict(d) -> MpdmCodebook:
    """Rebuild a codebook, re-deriving every count so a doctored file is caught."""
    if not isinstance(d, dict):
        raise DescriptorError("descriptor must be a JSON object")
    if d.get("format") != DESCRIPTOR_FORMAT:
        raise DescriptorError(f"not a codebook descriptor (format={d.get('format')!r})")
    if d.get("version") != DESCRIPTOR_VERSION:
        raise DescriptorError(f"unsupported descriptor version {d.get('version')!r}")
    for key in ("n", "k", "alphabet_size"):
        if type(d.get(key)) is not int or d[key] < 0:
            raise DescriptorError(f"{key} must be a nonnegative integer")
    a = d["alphabet_size"]
    c_typ = Composition(_int_list(d.get("c_typ"), "c_typ", a))
    if c_typ.n != d["n"] or c_typ.n < 1:
        raise DescriptorError("c_typ does not sum to n")
    pmf = d.get("pmf")
    if pmf is not None:
        try:
            pmf = Pmf(tuple(pmf))
        except (TypeError, ValueError) as exc:
            raise DescriptorError(f"bad pmf: {exc}") from None
        if len(pmf) != a:
            raise DescriptorError("pmf length differs from alphabet_size")
    raw_pairs = d.get("pairs")
    if not isinstance(raw_pairs, list) or not raw_pairs:
        raise DescriptorError("pairs must be a nonempty list")
    k = d["k"]
    twice = 2 * c_typ.as_array()
    pairs = []
    for i, p in enumerate(raw_pairs):
        if not isinstance(p, dict):
            raise DescriptorError(f"pair {i} must be an object")
        c = Composition(_int_list(p.get("c"), f"pair {i} c", a))
        c_bar = Composition(_int_list(p.get("c_bar"), f"pair {i} c_bar", a))
        if not np.array_equal(c.as_array() + c_bar.as_array(), twice):
            raise DescriptorError(f"pair {i} is not complementary to c_typ")
        if c == c_bar:
            k_l = floor_log2(multinomial(c))
        else:
            k_l = 1 + min(floor_log2(multinomial(c)), floor_log2(multinomial(c_bar)))
        if p.get("k_l") != k_l:
            raise DescriptorError(f"pair {i} k_l={p.get('k_l')!r}, expected {k_l}")
        prefix = p.get("prefix")
        if not isinstance(prefix, str) or set(prefix) - {"0", "1"}:
            raise DescriptorError(f"pair {i} prefix must be a bit string")
        if len(prefix) + k_l != k:
            raise DescriptorError(f"pair {i} prefix length + k_l != k")
        pairs.append(SelectedPair(CompositionPair(c, c_bar, k_l), prefix))
    if sum(sp.pair.usable for sp in pairs) != 1 << k:
        raise DescriptorError("selected pairs do not fill 2**k words")
    try:
        cb = MpdmCodebook(k=k, c_typ=c_typ, pairs=tuple(pairs), pmf=pmf)
    except ValueError as exc:
        raise DescriptorError(str(exc)) from None
    # sorted, Kraft-tight and prefix-free: consecutive starts must tile [0, 2**k)
    starts = cb._starts + [1 << k]
    if any(starts[i] + pairs[i].pair.usable != starts[i + 1] for i in range(len(pairs))):
        raise DescriptorError("prefixes are not a complete prefix-free code")
    return cb


def loads_codebook(data: bytes | str) -> MpdmCodebook:
    raw = data.encode("utf-8") if isinstance(data, str) else bytes(data)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DescriptorError(f"descriptor is not UTF-8 (byte offset {exc.start})") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise DescriptorError(f"parse error at byte offset {offset}: {exc.msg}") from None
    return codebook_from_dict(d)


def load_codebook(path) -> MpdmCodebook:
    with open(path, "rb") as fh:
        return loads_codebook(fh.read())


# --------------------------------------------------------------------- frames


@dataclass(frozen=True)
class FrameHeader:
    kind: int
    n: int
    k: int
    c_typ: tuple[int, ...]
    blocks: int

    @classmethod
    def for_codebook(cls, cb: MpdmCodebook, kind: int, blocks: int) -> "FrameHeader":
        return cls(kind, cb.n, cb.k, cb.c_typ.counts, blocks)

    def pack(self) -> bytes:
        a = len(self.c_typ)
        return (
            _HEAD.pack(MAGIC, FRAME_VERSION, self.kind, self.n, self.k, a)
            + struct.pack(f">{a}I", *self.c_typ)
            + _COUNT.pack(self.blocks)
        )

    @property
    def body_size(self) -> int:
        if self.kind == KIND_BITS:
            return -(-self.blocks * self.k // 8)
        return self.blocks * self.n

    def check(self, cb: MpdmCodebook) -> None:
        if (self.n, self.k, self.c_typ) != (cb.n, cb.k, cb.c_typ.counts):
            raise DataIntegrityError(
                f"frame was written for n={self.n}, k={self.k}, c_typ={list(self.c_typ)}; "
                f"codebook has n={cb.n}, k={cb.k}, c_typ={list(cb.c_typ.counts)}"
            )


def write_frame(fh: BinaryIO, header: FrameHeader, body: bytes) -> None:
    if len(body) != header.body_size:
        raise ValueError(f"body has {len(body)} bytes, header implies {header.body_size}")
    fh.write(header.pack())
    fh.write(body)
    fh.write(_CRC.pack(zlib.crc32(body)))


def _read_exact(fh: BinaryIO, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise DataIntegrityError(f"truncated frame: {what} cut short")
    return data


def read_frame(fh: BinaryIO) -> tuple[FrameHeader, bytes]:
    """Parse one frame and verify its checksum."""
    magic, version, kind, n, k, a = struct.unpack(_HEAD.format, _read_exact(fh, _HEAD.size, "header"))
    if magic != MAGIC:
        raise DataIntegrityError(f"bad magic {magic!r}")
    if version != FRAME_VERSION:
        raise DataIntegrityError(f"unsupported frame version {version}")
    if kind not in (KIND_BITS, KIND_SYMBOLS):
        raise DataIntegrityError(f"unknown frame kind {kind}")
    c_typ = struct.unpack(f">{a}I", _read_exact(fh, 4 * a, "header"))
    (blocks,) = _COUNT.unpack(_read_exact(fh, _COUNT.size, "header"))
    header = FrameHeader(kind, n, k, tuple(c_typ), blocks)
    size = header.body_size
    body = fh.read(size)
    if len(body) != size:
        per_block = n if kind == KIND_SYMBOLS else max(k, 1) / 8
        raise DataIntegrityError(
            f"truncated frame: body has {len(body)} of {size} bytes; "
            f"block {int(len(body) // per_block)} is incomplete"
        )
    tail = fh.read(_CRC.size)
    if len(tail) != _CRC.size:
        raise DataIntegrityError(f"truncated frame: checksum missing after block {blocks - 1}")
    (crc,) = _CRC.unpack(tail)
    if crc != zlib.crc32(body):
        raise DataIntegrityError(
            f"checksum mismatch in frame of {blocks} blocks (blocks 0..{blocks - 1} unverified)"
        )
    return header, body


def pack_bits(bits: np.ndarray) -> bytes:
    """Rows of bits, concatenated and packed MSB-first."""
    return np.packbits(np.asarray(bits, dtype=np.uint8).ravel()).tobytes()


def unpack_bits(data: bytes, blocks: int, k: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    return bits[: blocks * k].reshape(blocks, k)


def bytes_to_words(data: bytes, k: int) -> np.ndarray:
    """Split a byte string into ``k``-bit words; its bit length must divide evenly."""
    nbits = 8 * len(data)
    if k == 0:
        if nbits:
            raise ValueError("a k=0 codebook carries no data")
        return np.zeros((0, 0), dtype=np.uint8)
    if nbits % k:
        raise ValueError(f"input has {nbits} bits, not a multiple of k={k}")
    return unpack_bits(data, nbits // k, k)


def encode_stream(cb: MpdmCodebook, data: bytes, fh: BinaryIO, chunk: int = 1 << 16) -> int:
    """Encode raw bytes into a codeword frame; returns the block count."""
    words = bytes_to_words(data, cb.k)
    blocks = words.shape[0]
    body = bytearray()
    for start in range(0, blocks, chunk):
        body += cb.encode_batch(words[start:start + chunk]).tobytes()
    write_frame(fh, FrameHeader.for_codebook(cb, KIND_SYMBOLS, blocks), bytes(body))
    return blocks


def decode_stream(cb: MpdmCodebook, fh: BinaryIO, chunk: int = 1 << 16) -> bytes:
    """Inverse of :func:`encode_stream`; errors carry the failing block index."""
    header, body = read_frame(fh)
    if header.kind != KIND_SYMBOLS:
        raise DataIntegrityError("expected a codeword frame")
    header.check(cb)
    seqs = np.frombuffer(body, dtype=np.uint8).reshape(header.blocks, cb.n)
    out = []
    for start in range(0, header.blocks, chunk):
        try:
            out.append(cb.decode_batch(seqs[start:start + chunk], first_block=start))
        except ValueError as exc:
            raise DataIntegrityError(str(exc)) from None
    if not out:
        return b""
    return pack_bits(np.concatenate(out))
