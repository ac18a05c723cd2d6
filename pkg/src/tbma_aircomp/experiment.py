"""Monte Carlo SNR sweeps with reproducible, worker-count-independent results."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import schemes as sc
from . import theory
from .channel import awgn_superpose
from .model import ConfigError, DataDistribution, SystemConfig, sample_data, second_moment, true_mean
from .schemes import Scheme, SchemeResult
from .theory import LatticeVariant

WORKERS_ENV = "TBMA_AIRCOMP_WORKERS"
_DATA_STREAM = 0xDA7A
Z95 = 1.959963984540054


class NoCrossoverError(ValueError):
    pass


class SweepPointError(RuntimeError):
    def __init__(self, scheme: Scheme, snr_db: float, reason: str):
        super().__init__(f"{scheme.value} at {snr_db} dB: {reason}")
        self.scheme = scheme
        self.snr_db = snr_db


def default_workers() -> int:
    return int(os.environ.get(WORKERS_ENV, "1"))


@dataclass(frozen=True)
class SweepSpec:
    K: int = 1000
    N: int = 64
    snr_points_db: Sequence[float] = tuple(range(0, 31))
    trials: int = 100_000
    base_seed: int = 0
    schemes: Sequence[Scheme] = tuple(Scheme)
    distribution: DataDistribution = field(default_factory=DataDistribution.uniform)
    T: float = 1.0
    N0: float = 1.0
    # Draw one data realization and reuse it in every trial (noise-only MSE).
    freeze_data: bool = False
    # Lattice points escalate trials until both targets hold or the cap is hit.
    max_trials: int = 10_000_000
    min_error_events: int = 50
    max_rel_ci_width: float = 0.3
    lattice_variant: LatticeVariant = LatticeVariant.EXACT_SUM
    chunk_size: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "snr_points_db", tuple(float(s) for s in self.snr_points_db))
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        object.__setattr__(self, "lattice_variant", LatticeVariant(self.lattice_variant))
        if not self.snr_points_db:
            raise ConfigError("snr_points_db is empty")
        if any(b <= a for a, b in zip(self.snr_points_db, self.snr_points_db[1:])):
            raise ConfigError("snr_points_db must be strictly ascending")
        if self.trials < 100:
            raise ConfigError(f"trials must be >= 100, got {self.trials}")
        if not self.schemes:
            raise ConfigError("schemes is empty")
        if self.chunk_size < 1:
            raise ConfigError("chunk_size must be positive")
        self.cfg_at(self.snr_points_db[0])

    def cfg_at(self, snr_db: float) -> SystemConfig:
        return SystemConfig.from_snr_db(self.K, self.N, snr_db, N0=self.N0, T=self.T)

    @property
    def E_S(self) -> float:
        return second_moment(self.distribution, self.N)


@dataclass(frozen=True)
class CurvePoint:
    snr_db: float
    scheme: Scheme
    mse_empirical: float
    ci95_low: float
    ci95_high: float
    mse_theory: float
    trials_used: int
    # Lattice: resources whose projected count differs from the true count.
    error_events: int = 0


@dataclass
class SweepCurve:
    points: list
    spec: Optional[SweepSpec] = None

    def point(self, scheme: Scheme, snr_db: float) -> CurvePoint:
        for p in self.points:
            if p.scheme is scheme and p.snr_db == snr_db:
                return p
        raise KeyError((scheme, snr_db))

    def series(self, scheme: Scheme):
        pts = sorted((p for p in self.points if p.scheme is scheme), key=lambda p: p.snr_db)
        return np.array([p.snr_db for p in pts]), np.array([p.mse_empirical for p in pts])


def scheme_theory(scheme: Scheme, cfg: SystemConfig, E_S: float, variant=LatticeVariant.EXACT_SUM) -> float:
    if scheme is Scheme.DA:
        return theory.mse_da(cfg, E_S)
    if scheme is Scheme.TBMA_NAIVE:
        return theory.mse_tbma_naive(cfg, exact=True)
    return theory.mse_tbma_lattice_high_snr(cfg, variant)


# -- single trials ---------------------------------------------------------------


def _estimate(scheme: Scheme, hist: sc.TypeHistogram, cfg: SystemConfig, E_S: float, rng):
    if scheme is Scheme.DA:
        block = awgn_superpose(sc.da_sums_from_total(hist.first_moment(), cfg, E_S), cfg, rng)
        return block, sc.da_estimate(block, cfg, E_S)
    block = awgn_superpose(sc.tbma_transmit_sums(hist, cfg), cfg, rng)
    if scheme is Scheme.TBMA_NAIVE:
        return block, sc.tbma_naive_estimate(block, cfg, cfg.K)
    return block, sc.tbma_lattice_estimate(block, cfg, cfg.K)


def run_trial(scheme: Scheme, cfg: SystemConfig, dist: DataDistribution, seed) -> SchemeResult:
    """One realization of data and noise, fully determined by ``seed``."""
    scheme = Scheme(scheme)
    rng = np.random.default_rng(seed)
    data = sample_data(dist, cfg, rng)
    hist = sc.tbma_encode(data, cfg.N)
    _, estimate = _estimate(scheme, hist, cfg, second_moment(dist, cfg.N), rng)
    return SchemeResult.from_estimate(estimate, true_mean(data))


def trial_dump(cfg: SystemConfig, dist: DataDistribution, seed) -> dict:
    """Histogram, noisy and projected observations of one TBMA trial."""
    rng = np.random.default_rng(seed)
    data = sample_data(dist, cfg, rng)
    hist = sc.tbma_encode(data, cfg.N)
    block, naive = _estimate(Scheme.TBMA_NAIVE, hist, cfg, 0.0, rng)
    projected = sc.lattice_project(block, cfg)
    return {
        "seed": seed,
        "true_mean": true_mean(data),
        "counts": hist.counts.tolist(),
        "normalized_observations": (block.y / np.sqrt(cfg.P)).tolist(),
        "projected_counts": projected.tolist(),
        "estimate_naive": float(naive),
        "estimate_lattice": float(sc.tbma_lattice_estimate(block, cfg, cfg.K)),
        "decode_errors": int(np.count_nonzero(projected != hist.counts)),
    }


# -- batched trials --------------------------------------------------------------


class ChunkStats(NamedTuple):
    sum_se: float
    sum_se2: float
    count: int
    error_events: int


def chunk_seed(base_seed: int, scheme: Scheme, snr_index: int, chunk_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([base_seed, scheme.index, snr_index, chunk_index])


def simulate_chunk(scheme: Scheme, cfg: SystemConfig, pmf, E_S: float, size: int, rng, frozen_counts=None) -> ChunkStats:
    if frozen_counts is None:
        counts = rng.multinomial(cfg.K, pmf, size=size)
    else:
        counts = np.broadcast_to(frozen_counts, (size, cfg.N))
    hist = sc.TypeHistogram(counts, cfg.K)
    events = 0
    if scheme is Scheme.TBMA_LATTICE:
        block = awgn_superpose(sc.tbma_transmit_sums(hist, cfg), cfg, rng)
        diff = sc.lattice_project(block, cfg) - counts
        events = int(np.count_nonzero(diff))
        se = (diff @ np.arange(cfg.N, dtype=np.int64) / cfg.K) ** 2
    else:
        _, estimate = _estimate(scheme, hist, cfg, E_S, rng)
        se = (estimate - hist.first_moment() / cfg.K) ** 2
    return ChunkStats(float(se.sum()), float((se * se).sum()), size, events)


def merge(stats: Sequence[ChunkStats]) -> ChunkStats:
    """Order-independent reduction (correctly rounded float sums)."""
    return ChunkStats(
        math.fsum(s.sum_se for s in stats),
        math.fsum(s.sum_se2 for s in stats),
        sum(s.count for s in stats),
        sum(s.error_events for s in stats),
    )


def mean_ci(stats: ChunkStats):
    n = stats.count
    mean = stats.sum_se / n
    var = max(stats.sum_se2 - n * mean * mean, 0.0) / (n - 1) if n > 1 else 0.0
    half = Z95 * math.sqrt(var / n)
    return mean, max(mean - half, 0.0), mean + half


def _needs_more(stats: ChunkStats, spec: SweepSpec) -> bool:
    mean, low, high = mean_ci(stats)
    if stats.error_events < spec.min_error_events:
        return True
    return mean == 0 or (high - low) / mean > spec.max_rel_ci_width


def frozen_counts(spec: SweepSpec) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([spec.base_seed, _DATA_STREAM]))
    cfg = spec.cfg_at(spec.snr_points_db[0])
    return sc.tbma_encode(sample_data(spec.distribution, cfg, rng), spec.N).counts


def run_point(spec: SweepSpec, scheme: Scheme, snr_index: int, pool=None) -> CurvePoint:
    snr_db = spec.snr_points_db[snr_index]
    cfg = spec.cfg_at(snr_db)
    E_S = spec.E_S
    pmf = spec.distribution.pmf(spec.N)
    fixed = frozen_counts(spec) if spec.freeze_data else None
    C = spec.chunk_size

    def job(args):
        index, size = args
        rng = np.random.default_rng(chunk_seed(spec.base_seed, scheme, snr_index, index))
        return simulate_chunk(scheme, cfg, pmf, E_S, size, rng, fixed)

    done: list = []
    target = spec.trials
    while True:
        # a partial trailing chunk is recomputed at full size on escalation
        if done and done[-1].count < C:
            done.pop()
        jobs = [(i, min(C, target - i * C)) for i in range(len(done), -(-target // C))]
        try:
            done.extend(pool.map(job, jobs) if pool is not None else map(job, jobs))
        except MemoryError as exc:
            raise SweepPointError(scheme, snr_db, "out of memory") from exc
        stats = merge(done)
        if scheme is not Scheme.TBMA_LATTICE or target >= spec.max_trials or not _needs_more(stats, spec):
            break
        target = min(2 * target, spec.max_trials)

    mean, low, high = mean_ci(stats)
    return CurvePoint(
        snr_db=snr_db,
        scheme=scheme,
        mse_empirical=mean,
        ci95_low=low,
        ci95_high=high,
        mse_theory=scheme_theory(scheme, cfg, E_S, spec.lattice_variant),
        trials_used=stats.count,
        error_events=stats.error_events,
    )


def run_sweep(spec: SweepSpec, workers: Optional[int] = None, progress: Optional[Callable] = None) -> SweepCurve:
    """Empirical and theoretical MSE for every (scheme, SNR) pair of ``spec``.

    Chunk ``i`` of a point is seeded from (base_seed, scheme, snr index, i), so
    the curve is bit-identical for any number of workers.
    """
    workers = default_workers() if workers is None else workers
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    points = []
    try:
        for scheme in Scheme:
            if scheme not in spec.schemes:
                continue
            for i in range(len(spec.snr_points_db)):
                points.append(run_point(spec, scheme, i, pool))
                if progress is not None:
                    progress(points[-1])
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepCurve(points, spec)


def theory_curve(spec: SweepSpec) -> SweepCurve:
    """Closed-form rows only; the empirical columns are NaN."""
    nan = float("nan")
    points = [
        CurvePoint(snr, scheme, nan, nan, nan, scheme_theory(scheme, spec.cfg_at(snr), spec.E_S, spec.lattice_variant), 0)
        for scheme in Scheme
        if scheme in spec.schemes
        for snr in spec.snr_points_db
    ]
    return SweepCurve(points, spec)


# -- crossovers ------------------------------------------------------------------


def crossover_search(spec: SweepSpec, scheme_a: Scheme, scheme_b: Scheme, resolution_db: float = 0.1) -> float:
    """SNR (dB) where the theory curves of two schemes cross, by bisection."""
    E_S = spec.E_S

    def gap(snr_db):
        cfg = spec.cfg_at(snr_db)
        a = scheme_theory(scheme_a, cfg, E_S, spec.lattice_variant)
        b = scheme_theory(scheme_b, cfg, E_S, spec.lattice_variant)
        return math.log(a) - math.log(b)

    grid = spec.snr_points_db
    values = [gap(s) for s in grid]
    for lo, hi, g_lo, g_hi in zip(grid, grid[1:], values, values[1:]):
        if g_lo * g_hi < 0:
            break
    else:
        raise NoCrossoverError(f"no crossover in range [{grid[0]}, {grid[-1]}] dB")
    while hi - lo > resolution_db / 2:
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        if (g_mid < 0) == (g_lo < 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def empirical_crossover(curve: SweepCurve, scheme_a: Scheme, scheme_b: Scheme) -> float:
    """First sign change of log(mse_a / mse_b), linearly interpolated in dB."""
    snr_a, mse_a = curve.series(scheme_a)
    snr_b, mse_b = curve.series(scheme_b)
    if not np.array_equal(snr_a, snr_b):
        raise ValueError("curves are sampled on different SNR grids")
    with np.errstate(divide="ignore"):
        gap = np.log(mse_a) - np.log(mse_b)
    for i in range(len(gap) - 1):
        g0, g1 = gap[i], gap[i + 1]
        if np.isfinite(g0) and np.isfinite(g1) and g0 * g1 < 0:
            return float(snr_a[i] + (snr_a[i + 1] - snr_a[i]) * g0 / (g0 - g1))
    raise NoCrossoverError("empirical curves do not cross")
