import io
import json
import struct
import zlib

import numpy as np
import pytest

from mpdm.builder import build_codebook
from mpdm.core import quantize_pmf
from mpdm.fileio import (
    KIND_BITS,
    KIND_SYMBOLS,
    DataIntegrityError,
    DescriptorError,
    FrameHeader,
    codebook_to_dict,
    decode_stream,
    dumps_codebook,
    encode_stream,
    loads_codebook,
    pack_bits,
    read_frame,
    unpack_bits,
    write_frame,
)

PMF = [0.4415, 0.3209, 0.1654, 0.0722]


@pytest.fixture(scope="module")
def cb():
    return build_codebook(quantize_pmf(PMF, 10), quantize_pmf(PMF, 10).pmf())


def test_descriptor_roundtrip_is_behaviour_identical(cb):
    again = loads_codebook(dumps_codebook(cb))
    assert again.k == cb.k and again.c_typ == cb.c_typ and again.pairs == cb.pairs
    rng = np.random.default_rng(0)
    words = rng.integers(0, 2, (100, cb.k), dtype=np.uint8)
    a, b = io.BytesIO(), io.BytesIO()
    data = pack_bits(words)
    encode_stream(cb, data, a)
    encode_stream(again, data, b)
    assert a.getvalue() == b.getvalue()


def test_descriptor_fields(cb):
    d = codebook_to_dict(cb)
    assert d["format"] == "mpdm-codebook" and d["version"] == 1
    assert (d["n"], d["k"], d["alphabet_size"], d["c_typ"]) == (10, 16, 4, [4, 3, 2, 1])
    assert len(d["pairs"]) == 9
    assert {"c", "c_bar", "k_l", "prefix", "degenerate"} <= set(d["pairs"][0])


def test_descriptor_parse_error_has_byte_offset(cb):
    text = dumps_codebook(cb)
    broken = text[:40] + "}" + text[41:]
    with pytest.raises(DescriptorError, match="byte offset 40"):
        loads_codebook(broken)
    with pytest.raises(DescriptorError, match="byte offset"):
        loads_codebook(b"\xff\xfe")


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.update(format="other"), "not a codebook"),
        (lambda d: d.update(version=9), "version"),
        (lambda d: d["pairs"][0].update(k_l=14), "k_l"),
        (lambda d: d["pairs"][0].update(prefix="0011"), "prefix length"),
        (lambda d: d["pairs"][0].update(c=[3, 3, 3, 2]), "complementary"),
        (lambda d: d["pairs"].pop(), "2\\*\\*k"),
        (lambda d: d.update(c_typ=[4, 3, 2, 2]), "sum to n"),
        (lambda d: d["pairs"][0].update(prefix="111"), "canonical order"),
        (lambda d: d["pairs"][1].update(prefix="000"), "prefix-free"),
    ],
)
def test_descriptor_validation(cb, mutate, message):
    d = json.loads(dumps_codebook(cb))
    mutate(d)
    with pytest.raises(DescriptorError, match=message):
        loads_codebook(json.dumps(d))


def test_frame_roundtrip_and_layout(cb):
    rng = np.random.default_rng(1)
    data = rng.integers(0, 256, 2 * 10**4, dtype=np.uint8).tobytes()
    buf = io.BytesIO()
    blocks = encode_stream(cb, data, buf)
    assert blocks == 10**4
    raw = buf.getvalue()
    assert raw[:4] == b"MPDM" and raw[4] == 1 and raw[5] == KIND_SYMBOLS
    assert struct.unpack(">IIH", raw[6:16]) == (10, 16, 4)
    head = 16 + 16 + 8
    assert struct.unpack(">Q", raw[32:40]) == (blocks,)
    body = raw[head:-4]
    assert len(body) == blocks * 10
    assert struct.unpack(">I", raw[-4:])[0] == zlib.crc32(body)
    assert decode_stream(cb, io.BytesIO(raw)) == data


def test_empty_frame(cb):
    buf = io.BytesIO()
    assert encode_stream(cb, b"", buf) == 0
    assert decode_stream(cb, io.BytesIO(buf.getvalue())) == b""


def test_bit_frames():
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, (7, 13), dtype=np.uint8)
    header = FrameHeader(KIND_BITS, 10, 13, (4, 3, 2, 1), 7)
    buf = io.BytesIO()
    write_frame(buf, header, pack_bits(bits))
    got, body = read_frame(io.BytesIO(buf.getvalue()))
    assert got == header and len(body) == -(-7 * 13 // 8)
    np.testing.assert_array_equal(unpack_bits(body, 7, 13), bits)


def test_encode_requires_whole_words(cb):
    small = build_codebook((2, 1, 1))
    with pytest.raises(ValueError, match="multiple of k"):
        encode_stream(small, b"\x00", io.BytesIO())


def frame_of(cb, blocks=50):
    buf = io.BytesIO()
    encode_stream(cb, bytes(range(2 * blocks)), buf)
    return bytearray(buf.getvalue())


def test_corrupted_body_checksum(cb):
    raw = frame_of(cb)
    raw[60] ^= 0x01
    with pytest.raises(DataIntegrityError, match="checksum mismatch"):
        decode_stream(cb, io.BytesIO(bytes(raw)))


def test_truncated_frame_names_block(cb):
    raw = frame_of(cb)
    with pytest.raises(DataIntegrityError, match="block 12 is incomplete"):
        decode_stream(cb, io.BytesIO(bytes(raw[: 40 + 125])))
    with pytest.raises(DataIntegrityError, match="checksum missing"):
        decode_stream(cb, io.BytesIO(bytes(raw[:-2])))
    with pytest.raises(DataIntegrityError, match="truncated"):
        decode_stream(cb, io.BytesIO(bytes(raw[:10])))


def test_unknown_composition_names_block(cb):
    raw = frame_of(cb)
    body_start = 40
    # block 7 becomes all-zero amplitudes, which no selected pair uses
    raw[body_start + 70: body_start + 80] = bytes(10)
    body = bytes(raw[body_start:-4])
    raw[-4:] = struct.pack(">I", zlib.crc32(body))
    with pytest.raises(DataIntegrityError, match="block 7"):
        decode_stream(cb, io.BytesIO(bytes(raw)))


def test_chunked_decode_reports_absolute_block(cb):
    raw = frame_of(cb, 40)
    body_start = 40
    raw[body_start + 330: body_start + 340] = bytes(10)
    raw[-4:] = struct.pack(">I", zlib.crc32(bytes(raw[body_start:-4])))
    with pytest.raises(DataIntegrityError, match="block 33"):
        decode_stream(cb, io.BytesIO(bytes(raw)), chunk=16)


def test_header_mismatch(cb):
    raw = frame_of(cb)
    other = build_codebook(quantize_pmf(PMF, 12))
    with pytest.raises(DataIntegrityError, match="written for"):
        decode_stream(other, io.BytesIO(bytes(raw)))
    raw[:4] = b"XXXX"
    with pytest.raises(DataIntegrityError, match="magic"):
        decode_stream(cb, io.BytesIO(bytes(raw)))
