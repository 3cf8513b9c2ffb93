"""Rate-loss and AWGN rate sweeps over block length and SNR."""
from __future__ import annotations

import csv
import math
from functools import lru_cache
from typing import Iterable, Sequence

from scipy.optimize import brentq

from .air import (
    AirReport,
    AskConstellation,
    air_report,
    capacity_snr_db,
    maxwell_boltzmann,
    optimize_mb,
    r_bmd_2d,
)
from .builder import ccdm_input_bits, mpdm_input_bits
from .core import as_pmf, entropy, quantize_pmf

MODES = ("ccdm", "mpdm")


def input_bits(c_typ, mode: str) -> int:
    if mode == "ccdm":
        return ccdm_input_bits(c_typ)
    if mode == "mpdm":
        return mpdm_input_bits(c_typ)
    raise ValueError(f"unknown mode {mode!r}")


def rate_loss_point(pmf, n: int, mode: str) -> dict:
    comp = quantize_pmf(pmf, n)
    k = input_bits(comp, mode)
    return {"n": n, "k": k, "rate": k / n, "rate_loss": entropy(comp.pmf()) - k / n}


def rate_loss_sweep(pmf, n_min: int, n_max: int, mode: str) -> list[dict]:
    if not 1 <= n_min <= n_max:
        raise ValueError("need 1 <= n_min <= n_max")
    if n_max - n_min + 1 > 1000:
        raise ValueError("at most 1000 block lengths per sweep")
    pmf = as_pmf(pmf)
    return [rate_loss_point(pmf, n, mode) for n in range(n_min, n_max + 1)]


def first_length_below(pmf, threshold: float, mode: str, n_max: int = 2000, n_min: int = 1) -> int | None:
    """Smallest block length whose rate loss is at most ``threshold``."""
    pmf = as_pmf(pmf)
    for n in range(n_min, n_max + 1):
        if rate_loss_point(pmf, n, mode)["rate_loss"] <= threshold:
            return n
    return None


@lru_cache(maxsize=1024)
def shaped_pmf(snr_db: float, m: int):
    """Rate-maximizing Maxwell-Boltzmann amplitude PMF (cached)."""
    return optimize_mb(snr_db, m)[1]


def dm_air(snr_db: float, m: int, n: float, mode: str = "mpdm", nu: float | None = None) -> AirReport:
    """Rate of PAS with a length-``n`` matcher; ``n = inf`` means no rate loss."""
    if nu is None:
        target = shaped_pmf(snr_db, m)
    else:
        target = maxwell_boltzmann(nu, AskConstellation(m).amplitudes)
    if math.isinf(n):
        return air_report(snr_db, r_bmd_2d(target, snr_db, m), 0.0)
    comp = quantize_pmf(target, int(n))
    k = input_bits(comp, mode)
    quantized = comp.pmf()
    loss = max(entropy(quantized) - k / comp.n, 0.0)
    return air_report(snr_db, r_bmd_2d(quantized, snr_db, m), loss)


def uniform_r_bmd(snr_db: float, m: int) -> float:
    return r_bmd_2d([1.0 / 2 ** (m - 1)] * 2 ** (m - 1), snr_db, m)


def required_snr(target_air: float, rate_at, step: float = 0.1, limit: float = 40.0) -> float:
    """Lowest SNR (to root-finding precision) where ``rate_at(snr) >= target_air``.

    Scans upward from the capacity SNR of the target, then refines the first
    crossing by Brent's method.
    """
    lo = capacity_snr_db(target_air)
    f_lo = rate_at(lo) - target_air
    if f_lo >= 0:
        return lo
    snr = lo
    while snr < lo + limit:
        snr += step
        f = rate_at(snr) - target_air
        if f >= 0:
            if f == 0:
                return snr
            return brentq(lambda s: rate_at(s) - target_air, snr - step, snr, xtol=1e-6)
        lo = snr
    raise ValueError(f"rate {target_air} not reached within {limit} dB of capacity")


def snr_gap_at_air(target_air: float, m: int, n: float, mode: str = "mpdm") -> float:
    """SNR gap in dB to AWGN capacity at a given rate with a length-``n`` matcher."""
    snr = required_snr(target_air, lambda s: dm_air(s, m, n, mode).air_dm)
    return snr - capacity_snr_db(target_air)


def uniform_snr_gap_at_air(target_air: float, m: int) -> float:
    snr = required_snr(target_air, lambda s: uniform_r_bmd(s, m))
    return snr - capacity_snr_db(target_air)


def parse_lengths(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if tok in ("inf", "infinity", "∞"):
            out.append(math.inf)
        else:
            n = int(tok)
            if n < 1:
                raise ValueError("block lengths must be >= 1")
            out.append(n)
    if not out:
        raise ValueError("need at least one block length")
    return out


def length_label(n: float) -> str:
    return "inf" if math.isinf(n) else str(int(n))


def air_sweep(
    snrs: Iterable[float],
    m: int,
    lengths: Sequence[float],
    modes: Sequence[str] = ("mpdm",),
    nu: float | None = None,
) -> list[dict]:
    """One row per SNR: capacity, uniform and shaped BMD rates, and per
    matcher ``air_<mode>_<n>`` / ``gap_db_<mode>_<n>`` columns. Rows whose
    shaping optimization fails carry NaN and an ``error`` entry."""
    if m not in (2, 3, 4):
        raise ValueError("m must be 2, 3 or 4")
    if not lengths:
        raise ValueError("need at least one block length")
    columns = []
    for n in lengths:
        for mode in (["inf"] if math.isinf(n) else modes):
            columns.append((mode, n))
    rows = []
    for snr in snrs:
        snr = round(float(snr), 10)
        row = {"snr_db": snr}
        row["capacity"] = air_report(snr, 0.0, 0.0).capacity
        row["r_bmd_uniform"] = uniform_r_bmd(snr, m)
        try:
            inf_report = dm_air(snr, m, math.inf, nu=nu)
            row["r_bmd_shaped"] = inf_report.r_bmd
            for mode, n in columns:
                rep = inf_report if math.isinf(n) else dm_air(snr, m, n, mode, nu=nu)
                suffix = "inf" if math.isinf(n) else f"{mode}_{length_label(n)}"
                row[f"air_{suffix}"] = rep.air_dm
                row[f"gap_db_{suffix}"] = rep.gap_db
        except RuntimeError as exc:
            row["r_bmd_shaped"] = math.nan
            for mode, n in columns:
                suffix = "inf" if math.isinf(n) else f"{mode}_{length_label(n)}"
                row[f"air_{suffix}"] = math.nan
                row[f"gap_db_{suffix}"] = math.nan
            row["error"] = str(exc)
        rows.append(row)
    return rows


def format_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_csv(rows: list[dict], fh, columns: Sequence[str] | None = None) -> None:
    """Header plus one line per row, numbers to 6 significant digits."""
    if columns is None:
        columns = [c for c in (rows[0].keys() if rows else []) if c != "error"]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c, "")) for c in columns])
