"""Achievable rates of shaped ASK/QAM on the AWGN channel.

Conventions: the 1D ASK constellation is scaled to unit average energy; SNR is
symbol energy over noise variance per complex (2D) symbol, so each real
dimension sees noise variance ``1/SNR``. Rates in bit/2D-symbol are twice the
1D value, and a per-amplitude rate loss costs twice as much per 2D symbol.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Pmf, as_pmf, entropy

DEFAULT_NODES = 128


@lru_cache(maxsize=16)
def _hermgauss(nodes: int):
    t, w = np.polynomial.hermite.hermgauss(nodes)
    return t, w / math.sqrt(math.pi)


class OptimizerBracketError(RuntimeError):
    """The coarse grid of the shaping-parameter search was not unimodal."""


@dataclass(frozen=True)
class AskConstellation:
    """``2**m``-ary ASK with binary reflected Gray labels; the first bit is the sign."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need m >= 2")

    @property
    def amplitudes(self) -> np.ndarray:
        return np.arange(1, 2 ** self.m, 2, dtype=float)

    @property
    def points(self) -> np.ndarray:
        """Unscaled signed points, ascending."""
        amps = self.amplitudes
        return np.concatenate([-amps[::-1], amps])

    @property
    def labels(self) -> np.ndarray:
        """``(2**m, m)`` bit labels of :attr:`points`, MSB first."""
        idx = np.arange(2 ** self.m)
        gray = idx ^ (idx >> 1)
        return ((gray[:, None] >> np.arange(self.m - 1, -1, -1)) & 1).astype(np.uint8)

    def symbol_probs(self, p_amp) -> np.ndarray:
        """Signed-point probabilities for a uniform sign bit."""
        p = as_pmf(p_amp).as_array()
        if len(p) != 2 ** (self.m - 1):
            raise ValueError(f"expected {2 ** (self.m - 1)} amplitude probabilities")
        return np.concatenate([p[::-1], p]) / 2

    def scale(self, p_amp) -> float:
        probs = self.symbol_probs(p_amp)
        return 1.0 / math.sqrt(float(probs @ self.points**2))


@dataclass(frozen=True)
class AirReport:
    snr_db: float
    r_bmd: float
    r_loss_2d: float
    air_dm: float
    capacity: float
    gap_db: float


def maxwell_boltzmann(nu: float, amplitudes) -> Pmf:
    """P(a) proportional to exp(-nu a^2)."""
    if nu < 0:
        raise ValueError("nu must be >= 0")
    amps = np.asarray(amplitudes, dtype=float)
    logw = -nu * amps**2
    return Pmf.normalized(np.exp(logw - logw.max()))


def snr_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def awgn_capacity(snr_db: float) -> float:
    """log2(1 + SNR), bit/2D-symbol."""
    if snr_db == -math.inf:
        return 0.0
    return math.log2(1.0 + snr_linear(snr_db))


def capacity_snr_db(rate: float) -> float:
    """SNR in dB at which the AWGN capacity equals ``rate`` bit/2D."""
    if rate <= 0:
        return -math.inf
    return 10.0 * math.log10(2.0**rate - 1.0)


def r_bmd_1d(p_amp, snr_db: float, m: int, nodes: int = DEFAULT_NODES) -> float:
    """Bit-metric decoding rate of shaped ``2**m``-ASK in bits per real symbol."""
    const = AskConstellation(m)
    probs = const.symbol_probs(p_amp)
    x = const.points * const.scale(p_amp)
    labels = const.labels
    sigma = 1.0 / math.sqrt(snr_linear(snr_db))

    t, w = _hermgauss(nodes)
    used = probs > 0
    xs, ps, ls = x[used], probs[used], labels[used]
    # y = x_j + sqrt(2) sigma t_q for every sent point j and node q
    y = xs[:, None] + math.sqrt(2.0) * sigma * t[None, :]
    with np.errstate(divide="ignore"):
        logp = np.log(probs)
    loglik = -((y[:, :, None] - x[None, None, :]) ** 2) / (2 * sigma**2) + logp
    lik = np.exp(loglik - loglik.max(axis=2, keepdims=True))
    den = lik.sum(axis=2)
    ones = lik @ labels.astype(float)
    zeros = lik @ (1.0 - labels)
    # posterior mass of the sent bit value, per sent point, node and bit level
    own = np.where(ls[:, None, :].astype(bool), ones, zeros)
    info = np.log2(den[:, :, None] / own).sum(axis=2)
    cond_entropy = float(ps @ (info @ w))
    rate = entropy(ps) - cond_entropy
    if not math.isfinite(rate):
        raise FloatingPointError("non-finite BMD integrand; check the inputs' scaling")
    return rate


def r_bmd_2d(p_amp, snr_db: float, m: int, nodes: int = DEFAULT_NODES) -> float:
    """BMD rate in bit/2D-symbol for two independent ASK dimensions."""
    return 2.0 * r_bmd_1d(p_amp, snr_db, m, nodes)


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def optimize_mb(snr_db: float, m: int, nu_max: float = 1.0, grid: int = 81, tol: float = 1e-4):
    """Maxwell-Boltzmann parameter maximizing the BMD rate at ``snr_db``.

    A coarse grid (denser near zero) locates the peak and must rise then fall;
    golden-section search refines it to ``tol`` in nu. Returns ``(nu, pmf)``.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    amps = AskConstellation(m).amplitudes

    def rate(nu):
        return r_bmd_1d(maxwell_boltzmann(nu, amps), snr_db, m)

    nus = nu_max * np.linspace(0.0, 1.0, grid) ** 2
    vals = np.array([rate(nu) for nu in nus])
    best = int(np.argmax(vals))
    slack = 1e-12 * max(1.0, abs(vals[best]))
    if np.any(np.diff(vals[: best + 1]) < -slack) or np.any(np.diff(vals[best:]) > slack):
        raise OptimizerBracketError(f"BMD rate over nu is not unimodal at {snr_db} dB")
    lo = nus[max(best - 1, 0)]
    hi = nus[min(best + 1, grid - 1)]
    nu = _golden_max(rate, lo, hi, tol)
    if best == 0 and rate(0.0) >= rate(nu):
        nu = 0.0
    return nu, maxwell_boltzmann(nu, amps)


def air_dm(r_bmd: float, r_loss_per_amp: float) -> float:
    """BMD rate minus the matcher rate loss, bit/2D (two amplitudes per 2D symbol)."""
    if r_loss_per_amp < -1e-12:
        raise ValueError("rate loss must be nonnegative")
    return r_bmd - 2.0 * r_loss_per_amp


def i_pas(r_sh: float, r_fec: float, m: int) -> float:
    """Information per ASK symbol carried by shaped amplitudes plus sign bits."""
    base = (m - 1) / m
    if r_fec < base - 1e-12:
        raise ValueError(f"FEC rate {r_fec} below the PAS minimum {base}")
    return (base * r_sh + (r_fec - base)) * m


def shaping_efficiency(k: int, n: int, h_tilde: float, m: int, r_fec: float) -> float:
    """Ratio of PAS information with a finite-length matcher to an ideal one."""
    if r_fec < (m - 1) / m - 1e-12:
        raise ValueError("FEC rate below the PAS minimum")
    offset = 1.0 + m * (r_fec - 1.0)
    den = h_tilde + offset
    if den == 0:
        raise ZeroDivisionError("degenerate parameters: zero denominator")
    return (k / n + offset) / den


def fec_rate_threshold(r_bmd_1d_symbol: float, h_tilde: float, m: int) -> float:
    """FEC rate at which a threshold-achieving code carries ``r_bmd_1d_symbol``."""
    r = r_bmd_1d_symbol / m + (1.0 - h_tilde / (m - 1)) * (m - 1) / m
    if not 0 < r <= 1 + 1e-12:
        raise ValueError(f"FEC rate {r} outside (0, 1]")
    return r


def air_report(snr_db: float, r_bmd: float, r_loss_per_amp: float) -> AirReport:
    air = air_dm(r_bmd, r_loss_per_amp)
    return AirReport(
        snr_db=snr_db,
        r_bmd=r_bmd,
        r_loss_2d=2.0 * r_loss_per_amp,
        air_dm=air,
        capacity=awgn_capacity(snr_db),
        gap_db=snr_db - capacity_snr_db(air) if air > 0 else math.inf,
    )
