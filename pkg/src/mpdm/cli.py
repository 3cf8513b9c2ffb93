"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 I/O, 4 data integrity, 5 compute.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .air import OptimizerBracketError
from .builder import build_codebook
from .core import (
    CompositionMismatchError,
    Pmf,
    UnaddressableSequenceError,
    UnknownCompositionError,
    entropy,
    floor_log2,
    multinomial,
    quantize_pmf,
)
from .fileio import DataIntegrityError, DescriptorError, decode_stream, encode_stream, load_codebook, save_codebook
from .sweeps import MODES, air_sweep, length_label, parse_lengths, rate_loss_sweep, write_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DATA = 4
EXIT_COMPUTE = 5


class UsageError(Exception):
    pass


def parse_pmf(text: str) -> Pmf:
    try:
        values = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"--pmf must be comma-separated numbers, got {text!r}") from None
    total = math.fsum(values)
    if any(v < 0 or not math.isfinite(v) for v in values) or not total > 0:
        raise UsageError("--pmf entries must be finite, nonnegative and not all zero")
    if abs(total - 1.0) > 1e-6:
        raise UsageError(f"--pmf sums to {total:.9g}, not 1")
    # accept the usual rounding in hand-typed values
    return Pmf.normalized(values)


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="", encoding="utf-8")


def cmd_build(args) -> int:
    pmf = parse_pmf(args.pmf)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    comp = quantize_pmf(pmf, args.n)
    cb = build_codebook(comp, pmf)
    h = entropy(comp.pmf())
    print(f"c_typ     {comp}")
    print(f"n         {cb.n}")
    print(f"k         {cb.k}")
    print(f"rate      {cb.rate:.6g}")
    print(f"H         {h:.6g}")
    print(f"R_loss    {h - cb.rate:.6g}")
    print(f"k_ccdm    {floor_log2(multinomial(comp))}")
    print(f"pairs     {len(cb.pairs)}")
    if cb.k == 0:
        print("warning: quantized PMF puts all mass on one amplitude; k=0 carries no data", file=sys.stderr)
    if args.out:
        save_codebook(cb, args.out)
    return EXIT_OK


def cmd_info(args) -> int:
    cb = load_codebook(args.codebook)
    kraft = cb.kraft_sum()
    print(f"n {cb.n}  k {cb.k}  |A| {cb.alphabet_size}  c_typ {cb.c_typ}")
    if cb.pmf is not None:
        print("pmf " + ",".join(f"{p:.6g}" for p in cb.pmf))
    print(f"pairs {len(cb.pairs)}  kraft sum {kraft}{' (complete)' if kraft == 1 else ''}")
    width = max(len(sp.prefix) for sp in cb.pairs)
    for sp in cb.pairs:
        members = str(sp.pair.c) if sp.pair.degenerate else f"{sp.pair.c} / {sp.pair.c_bar}"
        tag = "  degenerate" if sp.pair.degenerate else ""
        print(f"  {sp.prefix or '-':<{width}}  k_l={sp.k_l:<4d} {members}{tag}")
    return EXIT_OK


def cmd_encode(args) -> int:
    cb = load_codebook(args.codebook)
    with open(args.input, "rb") as fh:
        data = fh.read()
    try:
        with open(args.out, "wb") as fh:
            blocks = encode_stream(cb, data, fh)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"encoded {blocks} blocks", file=sys.stderr)
    return EXIT_OK


def cmd_decode(args) -> int:
    cb = load_codebook(args.codebook)
    with open(args.input, "rb") as fh:
        data = decode_stream(cb, fh)
    with open(args.out, "wb") as fh:
        fh.write(data)
    return EXIT_OK


def cmd_sweep_rateloss(args) -> int:
    pmf = parse_pmf(args.pmf)
    try:
        rows = rate_loss_sweep(pmf, args.n_min, args.n_max, args.mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _open_out(args.out) as fh:
        write_csv(rows, fh, ["n", "k", "rate", "rate_loss"])
    return EXIT_OK


def _snr_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0 or hi < lo:
        raise UsageError("need --snr-step > 0 and --snr-max >= --snr-min")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def cmd_sweep_air(args) -> int:
    try:
        lengths = parse_lengths(args.lengths)
    except ValueError as exc:
        raise UsageError(f"--lengths: {exc}") from None
    if args.m not in (2, 3, 4):
        raise UsageError("--m must be 2, 3 or 4")
    if args.nu is not None and args.nu < 0:
        raise UsageError("--nu must be >= 0")
    modes = MODES if args.mode == "both" else (args.mode,)
    rows = air_sweep(_snr_grid(args.snr_min, args.snr_max, args.snr_step), args.m, lengths, modes, args.nu)
    columns = ["snr_db", "capacity", "r_bmd_uniform", "r_bmd_shaped"]
    for n in lengths:
        for mode in (["inf"] if math.isinf(n) else modes):
            suffix = "inf" if math.isinf(n) else f"{mode}_{length_label(n)}"
            columns += [f"air_{suffix}", f"gap_db_{suffix}"]
    with _open_out(args.out) as fh:
        write_csv(rows, fh, columns)
    failed = [r for r in rows if "error" in r]
    for r in failed:
        print(f"error at {r['snr_db']:g} dB: {r['error']}", file=sys.stderr)
    return EXIT_COMPUTE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpdm", description="Distribution matching codebooks, codecs and rate sweeps.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="quantize a PMF and build the pairwise matcher")
    b.add_argument("--pmf", required=True, help="comma-separated amplitude probabilities")
    b.add_argument("--n", type=int, required=True, help="block length in amplitudes")
    b.add_argument("--out", help="write the codebook descriptor (JSON) here")
    b.set_defaults(func=cmd_build)

    i = sub.add_parser("info", help="describe a saved codebook")
    i.add_argument("codebook")
    i.set_defaults(func=cmd_info)

    e = sub.add_parser("encode", help="map a byte file to a frame of amplitude blocks")
    e.add_argument("codebook")
    e.add_argument("input")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="invert a frame back to the original bytes")
    d.add_argument("codebook")
    d.add_argument("input")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_decode)

    r = sub.add_parser("sweep-rateloss", help="CSV of rate loss over block length")
    r.add_argument("--pmf", required=True)
    r.add_argument("--n-min", type=int, default=1)
    r.add_argument("--n-max", type=int, required=True)
    r.add_argument("--mode", choices=MODES, default="mpdm")
    r.add_argument("--out", help="CSV path (default stdout)")
    r.set_defaults(func=cmd_sweep_rateloss)

    a = sub.add_parser("sweep-air", help="CSV of AWGN rates and SNR gaps over SNR")
    a.add_argument("--snr-min", type=float, required=True)
    a.add_argument("--snr-max", type=float, required=True)
    a.add_argument("--snr-step", type=float, default=1.0)
    a.add_argument("--m", type=int, default=3, help="bits per ASK symbol")
    a.add_argument("--lengths", default="inf", help="comma-separated block lengths; 'inf' for no rate loss")
    a.add_argument("--mode", choices=MODES + ("both",), default="mpdm")
    a.add_argument("--nu", type=float, help="fixed shaping parameter instead of the per-SNR optimum")
    a.add_argument("--out", help="CSV path (default stdout)")
    a.set_defaults(func=cmd_sweep_air)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mpdm {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataIntegrityError, DescriptorError, CompositionMismatchError,
            UnknownCompositionError, UnaddressableSequenceError) as exc:
        print(f"mpdm {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"mpdm {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OptimizerBracketError, ArithmeticError, MemoryError) as exc:
        print(f"mpdm {args.command}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
