"""Link-level OFDM: sample generation, misaligned receive windows, per-subcarrier powers.

Sample period is normalized to 1, channel gain and symbol energy to 1 unless set
otherwise.  Timing offsets here are integer samples; the receive window for an
offset d splits into four regimes depending on which neighbouring symbols leak
into the FFT window:

  1. d in [-(N+Ncp), -N): window drawn entirely from symbol m+1 (no useful power);
  2. d in [-N, 0):        splice of symbols m and m+1;
  3. d in [0, Ncp):       pure cyclic shift of symbol m (no self-interference);
  4. d in [Ncp, N+Ncp):   splice of symbols m-1 and m.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OfdmConfig",
    "SymbolStream",
    "PowerProfile",
    "qpsk_stream",
    "gaussian_stream",
    "modulate_symbol",
    "receive_window",
    "demodulate_window",
    "used_outputs",
    "closed_form_outputs",
    "analytic_power_profile",
    "empirical_power_profile",
]


@dataclass(frozen=True)
class OfdmConfig:
    """FFT size, cyclic-prefix length and the set of occupied subcarriers."""

    n: int
    n_cp: int
    used: tuple[int, ...]

    def __post_init__(self):
        if self.n <= 0 or self.n_cp <= 0:
            raise ValueError("n and n_cp must be positive")
        if self.n_cp >= self.n:
            raise ValueError("cyclic prefix must be shorter than the FFT size")
        if len(self.used) == 0:
            raise ValueError("at least one subcarrier must be used")
        if len(set(self.used)) != len(self.used):
            raise ValueError("duplicate subcarrier indices")
        for k in self.used:
            if not -self.n // 2 <= k < self.n // 2:
                raise ValueError(f"subcarrier {k} outside [-{self.n // 2}, {self.n // 2})")
        object.__setattr__(self, "used", tuple(sorted(self.used)))

    @classmethod
    def centered(cls, n: int, n_cp: int, lo: int, hi: int) -> "OfdmConfig":
        """Config with the contiguous subcarrier range lo..hi inclusive."""
        return cls(n, n_cp, tuple(range(lo, hi + 1)))

    @property
    def domain_half_width(self) -> int:
        """Half-width of the admissible timing-offset domain."""
        return self.n + self.n_cp

    def check_offset(self, d) -> None:
        w = self.domain_half_width
        if not -w <= d < w:
            raise ValueError(f"timing offset {d} outside [-{w}, {w})")

    def used_array(self) -> np.ndarray:
        return np.asarray(self.used, dtype=int)


@dataclass
class SymbolStream:
    """Data symbols per (subcarrier, OFDM symbol); zero on unused subcarriers."""

    used: tuple[int, ...]
    symbols: dict[int, np.ndarray] = field(default_factory=dict)
    energy_per_sample: float = 1.0

    def get(self, m: int) -> np.ndarray:
        if m not in self.symbols:
            raise ValueError(f"no data for OFDM symbol {m}")
        return self.symbols[m]

    def spectrum(self, n: int, m: int) -> np.ndarray:
        """Length-n frequency grid with used entries placed at index k mod n."""
        grid = np.zeros(n, dtype=complex)
        grid[np.asarray(self.used, dtype=int) % n] = self.get(m)
        return grid


def qpsk_stream(config: OfdmConfig, symbol_indices, rng: np.random.Generator,
                energy_per_sample: float = 1.0) -> SymbolStream:
    """Unit-modulus QPSK symbols, i.i.d. per (subcarrier, symbol)."""
    k = len(config.used)
    syms = {}
    for m in symbol_indices:
        q = rng.integers(0, 4, size=k)
        syms[m] = np.exp(1j * (np.pi / 4 + np.pi / 2 * q))
    return SymbolStream(config.used, syms, energy_per_sample)


def gaussian_stream(config: OfdmConfig, symbol_indices, rng: np.random.Generator,
                    energy_per_sample: float = 1.0) -> SymbolStream:
    """Circularly-symmetric complex Gaussian symbols with unit variance."""
    k = len(config.used)
    syms = {}
    for m in symbol_indices:
        syms[m] = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2.0)
    return SymbolStream(config.used, syms, energy_per_sample)


def modulate_symbol(config: OfdmConfig, stream: SymbolStream, m: int) -> np.ndarray:
    """Time samples of OFDM symbol m, indices -n_cp .. n-1 (array index 0 is -n_cp)."""
    grid = stream.spectrum(config.n, m)
    # sample[t] = (sqrt(E)/N) sum_k S[k] e^{j 2 pi k t / N}  ==  sqrt(E) * ifft
    body = np.sqrt(stream.energy_per_sample) * np.fft.ifft(grid)
    return np.concatenate([body[-config.n_cp:], body])


def receive_window(config: OfdmConfig, stream: SymbolStream, d: int, m: int) -> np.ndarray:
    """The n samples entering the FFT when the window is offset by d samples."""
    if d != int(d):
        raise ValueError("receive_window takes integer sample offsets")
    d = int(d)
    config.check_offset(d)
    n, ncp = config.n, config.n_cp

    def samples(mm: int) -> np.ndarray:
        return modulate_symbol(config, stream, mm)

    def tap(arr: np.ndarray, t: np.ndarray) -> np.ndarray:
        return arr[t + ncp]  # array index 0 holds time sample -ncp

    t = np.arange(n)
    if d < -n:  # regime 1: entirely next symbol
        return tap(samples(m + 1), t - d - n - ncp)
    if d < 0:  # regime 2: current + next
        split = n + d
        cur = tap(samples(m), t[:split] - d)
        nxt = tap(samples(m + 1), t[split:] - split - ncp)
        return np.concatenate([cur, nxt])
    if d < ncp:  # regime 3: cyclic shift of current symbol
        return tap(samples(m), t - d)
    # regime 4: previous + current
    split = d - ncp
    prev = tap(samples(m - 1), t[:split] + n + ncp - d)
    cur = tap(samples(m), t[split:] - d)
    return np.concatenate([prev, cur])


def demodulate_window(window: np.ndarray) -> np.ndarray:
    """Y[l] = sum_t window[t] e^{-j 2 pi l t / N}; index l mod N."""
    window = np.asarray(window)
    if window.ndim != 1:
        raise ValueError("window must be one-dimensional")
    return np.fft.fft(window)


def used_outputs(config: OfdmConfig, outputs: np.ndarray) -> np.ndarray:
    """Demodulator outputs restricted to the used subcarriers, in config order."""
    if len(outputs) != config.n:
        raise ValueError(f"expected {config.n} demodulator outputs, got {len(outputs)}")
    return outputs[config.used_array() % config.n]


def closed_form_outputs(config: OfdmConfig, stream: SymbolStream, d: int, m: int) -> np.ndarray:
    """Per-subcarrier outputs from the explicit closed forms, regimes 1-2 only.

    Returns the full length-n array (index l mod n), for comparison against
    demodulate_window(receive_window(...)).
    """
    if d != int(d):
        raise ValueError("integer offsets only")
    d = int(d)
    config.check_offset(d)
    n, ncp = config.n, config.n_cp
    if d >= 0:
        raise ValueError("closed forms implemented for offsets in [-(n+n_cp), 0) only")
    root_e = np.sqrt(stream.energy_per_sample)
    used = config.used_array()
    ell = np.arange(n)

    if d < -n:  # regime 1: phase-rotated copy of symbol m+1
        out = np.zeros(n, dtype=complex)
        phase = np.exp(1j * 2 * np.pi * used * (-d - ncp) / n)
        out[used % n] = root_e * phase * stream.get(m + 1)
        return out

    # regime 2
    s_cur = stream.get(m)
    s_nxt = stream.get(m + 1)
    rot_cur = s_cur * np.exp(-1j * 2 * np.pi * used * d / n)
    rot_nxt = s_nxt * np.exp(1j * 2 * np.pi * used * (-d - ncp) / n)

    out = np.zeros(n, dtype=complex)
    out[used % n] = root_e * ((n + d) / n * rot_cur - d / n * rot_nxt)

    # inter-carrier terms: geometric-sum kernel over k != l
    j = used[None, :] - ell[:, None]  # (n, used)
    with np.errstate(invalid="ignore", divide="ignore"):
        kernel = (1.0 - np.exp(1j * 2 * np.pi * j * (n + d) / n)) / (1.0 - np.exp(1j * 2 * np.pi * j / n))
    kernel = np.where(j % n == 0, 0.0, kernel)
    out += root_e / n * kernel @ (rot_cur - rot_nxt)
    return out


@dataclass
class PowerProfile:
    """Useful/total received power per used subcarrier at one timing offset."""

    offset: int
    subcarriers: np.ndarray
    useful: np.ndarray
    total: np.ndarray
    stderr_total: np.ndarray | None = None

    def to_csv(self, path) -> None:
        stderr = self.stderr_total
        if stderr is None:
            stderr = np.zeros_like(self.total)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["subcarrier", "useful", "total", "stderr_total"])
            for k, u, t, s in zip(self.subcarriers, self.useful, self.total, stderr):
                w.writerow([int(k), f"{u:.10g}", f"{t:.10g}", f"{s:.10g}"])

    def sir_db(self, subcarrier: int) -> float:
        """Useful-to-self-interference ratio on one subcarrier, in dB."""
        i = int(np.nonzero(self.subcarriers == subcarrier)[0][0])
        return 10.0 * np.log10(self.useful[i] / (self.total[i] - self.useful[i]))


def _ici_sum(config: OfdmConfig, width: float) -> np.ndarray:
    """sum over used k != l of sin^2(pi*width*(k-l)/n) / sin^2(pi*(k-l)/n), per used l."""
    used = config.used_array()
    j = used[None, :] - used[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.sin(np.pi * width * j / config.n) ** 2 / np.sin(np.pi * j / config.n) ** 2
    np.fill_diagonal(terms, 0.0)
    return terms.sum(axis=1)


def analytic_power_profile(config: OfdmConfig, d: int) -> PowerProfile:
    """Expected per-subcarrier powers at offset d, unit channel gain and energy."""
    if d != int(d):
        raise ValueError("integer offsets only")
    d = int(d)
    config.check_offset(d)
    n, ncp = config.n, config.n_cp
    used = config.used_array()
    k = len(used)

    if d < -n:  # regime 1
        useful = np.zeros(k)
        total = np.ones(k)
    elif d < 0:  # regime 2
        useful = np.full(k, ((n + d) / n) ** 2)
        total = ((n + d) ** 2 + d ** 2) / n ** 2 + 2.0 / n ** 2 * _ici_sum(config, n + d)
    elif d < ncp:  # regime 3
        useful = np.ones(k)
        total = np.ones(k)
    else:  # regime 4
        useful = np.full(k, ((n + ncp - d) / n) ** 2)
        total = ((n - d + ncp) ** 2 + (d - ncp) ** 2) / n ** 2 + 2.0 / n ** 2 * _ici_sum(config, d - ncp)
    return PowerProfile(d, used, useful, total)


def empirical_power_profile(config: OfdmConfig, d: int, trials: int, seed: int,
                            alphabet: str = "qpsk") -> PowerProfile:
    """Monte Carlo per-subcarrier powers averaged over random symbol streams.

    The useful power is estimated from the correlation of the output with the
    desired symbol, |mean Y[l] conj(S[l;m])|^2, which is independent of the
    analytic per-regime decomposition.  Deterministic per (seed, trial).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if alphabet not in ("qpsk", "gaussian"):
        raise ValueError(f"unknown alphabet {alphabet!r}")
    gen = qpsk_stream if alphabet == "qpsk" else gaussian_stream
    used_mod = config.used_array() % config.n
    k = len(config.used)
    total_sum = np.zeros(k)
    total_sq = np.zeros(k)
    cross = np.zeros(k, dtype=complex)
    m = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        stream = gen(config, (m - 1, m, m + 1), rng)
        y = demodulate_window(receive_window(config, stream, d, m))[used_mod]
        p = np.abs(y) ** 2
        total_sum += p
        total_sq += p ** 2
        cross += y * np.conj(stream.get(m))
    total = total_sum / trials
    var = np.maximum(total_sq / trials - total ** 2, 0.0)
    stderr = np.sqrt(var / trials)
    useful = np.abs(cross / trials) ** 2
    return PowerProfile(int(d), config.used_array(), useful, total, stderr)
