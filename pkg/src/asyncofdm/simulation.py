"""Seeded Monte Carlo simulation of Poisson transmitter fields.

The receiver sits at the center of a finite disk whose radius is chosen so the
expected point count is large enough (default 2000) that truncating the far
interference is negligible; alpha > 2 makes the discarded tail summable.  Each
trial draws from its own RNG substream seeded by (master_seed, trial_index), so
results are bit-identical regardless of how trials are distributed over workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .link import OfdmConfig
from .sinr import NetworkParams, NetworkSnapshot, snapshot_sinr_all
from .timing import TimingModel

__all__ = [
    "SimSpec",
    "Estimate",
    "TrialResults",
    "sample_snapshot",
    "count_decodable",
    "run_trials",
    "estimate_mean_decodable",
    "estimate_throughput",
    "estimate_distribution",
    "estimate_nearest_prob",
]


@dataclass(frozen=True)
class SimSpec:
    """Trial count, observation window and master seed for one simulation run."""

    trials: int
    master_seed: int
    expected_points: int = 2000
    window_radius: float | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.window_radius is None and self.expected_points < 100:
            raise ValueError("expected_points < 100 makes window edge effects significant")
        if self.window_radius is not None and self.window_radius <= 0:
            raise ValueError("window_radius must be positive")

    def radius(self, density: float) -> float:
        if self.window_radius is not None:
            return self.window_radius
        return math.sqrt(self.expected_points / (math.pi * density))


@dataclass(frozen=True)
class Estimate:
    mean: float
    ci_half_width: float  # 95%, normal approximation
    trials: int


def sample_snapshot(params: NetworkParams, timing: TimingModel, spec: SimSpec,
                    trial_index: int) -> NetworkSnapshot:
    """One PPP realization on the observation disk, deterministic per (seed, trial)."""
    rng = np.random.default_rng([spec.master_seed, trial_index])
    radius = spec.radius(params.density)
    count = rng.poisson(params.density * math.pi * radius ** 2)
    distances = radius * np.sqrt(rng.random(count))
    fades = rng.exponential(1.0, count)
    offsets = timing.sample(rng, count)
    return NetworkSnapshot(distances, fades, offsets, params.noise_over_e, params.alpha)


def count_decodable(snapshot: NetworkSnapshot, threshold: float, config: OfdmConfig) -> int:
    """Number of transmitters whose SINR clears the threshold."""
    if len(snapshot) == 0:
        return 0
    return int(np.count_nonzero(snapshot_sinr_all(snapshot, config) >= threshold))


def _nearest_sinr(snapshot: NetworkSnapshot, config: OfdmConfig) -> float:
    """SINR of the minimum-distance transmitter; nan for an empty snapshot."""
    if len(snapshot) == 0:
        return math.nan
    i = int(np.argmin(snapshot.distances))
    return float(snapshot_sinr_all(snapshot, config)[i])


def _trial_chunk(args):
    params, timing, config, spec, start, stop = args
    counts = np.empty(stop - start, dtype=np.int64)
    near = np.empty(stop - start, dtype=float)
    for i, t in enumerate(range(start, stop)):
        snap = sample_snapshot(params, timing, spec, t)
        counts[i] = count_decodable(snap, params.threshold, config)
        near[i] = _nearest_sinr(snap, config)
    return start, counts, near


@dataclass
class TrialResults:
    """Per-trial decodable counts and nearest-transmitter SINRs, in trial order."""

    counts: np.ndarray
    nearest_sinr: np.ndarray
    threshold: float

    @property
    def trials(self) -> int:
        return len(self.counts)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "count", "nearest_sinr_db"])
            for t, (c, s) in enumerate(zip(self.counts, self.nearest_sinr)):
                sinr_db = "" if math.isnan(s) else f"{10.0 * math.log10(s):.10g}"
                w.writerow([t, int(c), sinr_db])


def run_trials(params: NetworkParams, timing: TimingModel, config: OfdmConfig,
               spec: SimSpec, workers: int = 1) -> TrialResults:
    """Run all trials, optionally across processes; output independent of workers."""
    counts = np.empty(spec.trials, dtype=np.int64)
    near = np.empty(spec.trials, dtype=float)
    if workers <= 1:
        _, counts[:], near[:] = _trial_chunk((params, timing, config, spec, 0, spec.trials))
    else:
        bounds = np.linspace(0, spec.trials, workers + 1, dtype=int)
        jobs = [(params, timing, config, spec, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for start, c, s in pool.map(_trial_chunk, jobs):
                counts[start:start + len(c)] = c
                near[start:start + len(s)] = s
    return TrialResults(counts, near, params.threshold)


def _mean_ci(x: np.ndarray) -> Estimate:
    n = len(x)
    mean = float(np.mean(x))
    half = 0.0 if n < 2 else 1.96 * float(np.std(x, ddof=1)) / math.sqrt(n)
    return Estimate(mean, half, n)


def estimate_mean_decodable(params: NetworkParams, timing: TimingModel, config: OfdmConfig,
                            spec: SimSpec, workers: int = 1,
                            results: TrialResults | None = None) -> Estimate:
    if results is None:
        results = run_trials(params, timing, config, spec, workers)
    return _mean_ci(results.counts.astype(float))


def estimate_throughput(params: NetworkParams, timing: TimingModel, config: OfdmConfig,
                        spec: SimSpec, workers: int = 1,
                        results: TrialResults | None = None) -> Estimate:
    est = estimate_mean_decodable(params, timing, config, spec, workers, results)
    rate = math.log1p(params.threshold)
    return Estimate(rate * est.mean, rate * est.ci_half_width, est.trials)


def _wilson(successes: np.ndarray, n: int, z: float = 1.96):
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return center, half


@dataclass
class EmpiricalDistribution:
    """Histogram of the decodable count with Wilson intervals per bin."""

    counts: np.ndarray  # n values 0..max observed
    pmf: np.ndarray
    ci_center: np.ndarray
    ci_half_width: np.ndarray
    trials: int

    def ccdf(self) -> np.ndarray:
        out = np.cumsum(self.pmf[::-1])[::-1]
        out[0] = 1.0  # exact by construction; cumsum rounds
        return out

    def ccdf_stderr(self) -> np.ndarray:
        tail = self.ccdf()
        return np.sqrt(np.clip(tail * (1.0 - tail), 0.0, None) / self.trials)


def estimate_distribution(params: NetworkParams, timing: TimingModel, config: OfdmConfig,
                          spec: SimSpec, workers: int = 1,
                          results: TrialResults | None = None) -> EmpiricalDistribution:
    if results is None:
        results = run_trials(params, timing, config, spec, workers)
    n_max = int(results.counts.max(initial=0))
    values = np.arange(n_max + 1)
    hist = np.bincount(results.counts, minlength=n_max + 1).astype(float)
    center, half = _wilson(hist, results.trials)
    return EmpiricalDistribution(values, hist / results.trials, center, half, results.trials)


def estimate_nearest_prob(params: NetworkParams, timing: TimingModel, config: OfdmConfig,
                          spec: SimSpec, workers: int = 1,
                          results: TrialResults | None = None) -> Estimate:
    """Fraction of trials where the nearest transmitter decodes; empty trials fail."""
    if results is None:
        results = run_trials(params, timing, config, spec, workers)
    ok = np.where(np.isnan(results.nearest_sinr), False,
                  results.nearest_sinr >= params.threshold)
    return _mean_ci(ok.astype(float))
