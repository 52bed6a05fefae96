"""First-order system-level SINR model for timing-misaligned OFDM links.

The link-level analysis collapses into a single weight g(d): the fraction of
useful signal energy retained at misalignment d.  The total received power from
every transmitter is approximated as its full power, so the SINR of transmitter
i on a network snapshot is

    g(d_i) p_i / ((1 - g(d_i)) p_i + sum_{j != i} p_j + N0/E),   p_i = r_i^-alpha f_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .link import OfdmConfig

__all__ = [
    "NetworkParams",
    "NetworkSnapshot",
    "cp_weight",
    "cp_weight_clipped",
    "self_interference_factor",
    "snapshot_sinr",
    "snapshot_sinr_all",
    "hypothesis_set",
    "hypothesis_weight",
]


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class NetworkParams:
    """Transmitter density, pathloss, power budget and detection threshold.

    `snr` is E/N0 with distances in meters and unit-gain pathloss at 1 m;
    math.inf selects the interference-limited regime.  `threshold` is linear.
    """

    density: float
    alpha: float
    snr: float
    threshold: float

    def __post_init__(self):
        if self.density <= 0:
            raise ValueError("density must be positive")
        if self.alpha <= 2:
            raise ValueError("alpha must exceed 2 for the interference to converge")
        if self.snr <= 0:
            raise ValueError("snr must be positive")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")

    @classmethod
    def from_budget(cls, density: float, alpha: float, threshold_db: float,
                    tx_power_dbm: float, bandwidth_hz: float,
                    noise_psd_dbm_hz: float, noise_figure_db: float) -> "NetworkParams":
        noise_dbm = noise_psd_dbm_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
        return cls(density, alpha, db_to_linear(tx_power_dbm - noise_dbm),
                   db_to_linear(threshold_db))

    @property
    def noise_over_e(self) -> float:
        return 0.0 if math.isinf(self.snr) else 1.0 / self.snr

    def with_threshold(self, threshold: float) -> "NetworkParams":
        return NetworkParams(self.density, self.alpha, self.snr, threshold)

    def with_threshold_db(self, threshold_db: float) -> "NetworkParams":
        return self.with_threshold(db_to_linear(threshold_db))

    def interference_limited(self) -> "NetworkParams":
        return NetworkParams(self.density, self.alpha, math.inf, self.threshold)


def cp_weight(config: OfdmConfig, d):
    """Retained useful-energy fraction g(d) on [-(n+n_cp), n+n_cp); real d allowed."""
    d_arr = np.asarray(d, dtype=float)
    w = config.domain_half_width
    if np.any(d_arr < -w) or np.any(d_arr >= w):
        raise ValueError(f"timing offset outside [-{w}, {w})")
    out = cp_weight_clipped(config, d_arr)
    return out if out.ndim else float(out)


def cp_weight_clipped(config: OfdmConfig, d):
    """g(d) extended by zero outside its domain (used for shifted hypotheses)."""
    d = np.asarray(d, dtype=float)
    n, ncp = config.n, config.n_cp
    out = np.zeros_like(d)
    rising = (d >= -n) & (d < 0)
    out = np.where(rising, ((n + d) / n) ** 2, out)
    out = np.where((d >= 0) & (d < ncp), 1.0, out)
    falling = (d >= ncp) & (d < n + ncp)
    out = np.where(falling, ((n + ncp - d) / n) ** 2, out)
    return out


def self_interference_factor(config: OfdmConfig, tau: float, threshold: float):
    """The fading-threshold multiplier h(tau, T); None when decoding is impossible.

    Defined as T / ((1+T) g(tau) - T) whenever g(tau) > T/(1+T); always >= T,
    with equality iff g(tau) = 1.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    g = cp_weight(config, tau)
    denom = (1.0 + threshold) * g - threshold
    if denom <= 0:
        return None
    return threshold / denom


@dataclass
class NetworkSnapshot:
    """One realization of the transmitter field seen by the receiver at the origin."""

    distances: np.ndarray
    fades: np.ndarray
    offsets: np.ndarray
    noise_over_e: float
    alpha: float

    def __post_init__(self):
        self.distances = np.asarray(self.distances, dtype=float)
        self.fades = np.asarray(self.fades, dtype=float)
        self.offsets = np.asarray(self.offsets, dtype=float)
        if not (len(self.distances) == len(self.fades) == len(self.offsets)):
            raise ValueError("per-transmitter arrays must have equal length")
        if np.any(self.distances <= 0) or np.any(self.fades <= 0):
            raise ValueError("distances and fades must be positive")
        if self.noise_over_e < 0:
            raise ValueError("noise_over_e must be nonnegative")

    def __len__(self) -> int:
        return len(self.distances)

    def received_powers(self) -> np.ndarray:
        return self.fades * self.distances ** (-self.alpha)


def snapshot_sinr_all(snapshot: NetworkSnapshot, config: OfdmConfig) -> np.ndarray:
    """SINR of every transmitter in the snapshot."""
    if len(snapshot) == 0:
        return np.zeros(0)
    p = snapshot.received_powers()
    g = cp_weight(config, snapshot.offsets)
    interference = p.sum() - p  # everyone else at full power
    denom = (1.0 - g) * p + interference + snapshot.noise_over_e
    return g * p / denom


def snapshot_sinr(snapshot: NetworkSnapshot, i: int, config: OfdmConfig) -> float:
    if len(snapshot) == 0:
        raise ValueError("empty snapshot")
    return float(snapshot_sinr_all(snapshot, config)[i])


def hypothesis_set(n1: int, n2: int, delta: float) -> tuple[float, ...]:
    """Receiver timing hypotheses -n1*delta, ..., 0, ..., n2*delta."""
    if n1 < 0 or n2 < 0 or delta <= 0:
        raise ValueError("need n1, n2 >= 0 and delta > 0")
    return tuple(k * delta for k in range(-n1, n2 + 1))


def hypothesis_weight(config: OfdmConfig, hypotheses, x):
    """Best retained-energy fraction over the timing hypotheses: max_t g(x - t)."""
    hypotheses = tuple(hypotheses)
    if not hypotheses:
        raise ValueError("hypothesis set must be non-empty")
    x_arr = np.asarray(x, dtype=float)
    w = config.domain_half_width
    if np.any(x_arr < -w) or np.any(x_arr >= w):
        raise ValueError(f"timing offset outside [-{w}, {w})")
    out = np.zeros_like(x_arr)
    for t in hypotheses:
        out = np.maximum(out, cp_weight_clipped(config, x_arr - t))
    return out if out.ndim else float(out)
