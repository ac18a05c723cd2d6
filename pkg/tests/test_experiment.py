import itertools
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy.stats import norm

from tbma_aircomp import experiment as ex
from tbma_aircomp import schemes as sc
from tbma_aircomp.channel import awgn_superpose
from tbma_aircomp.experiment import CurvePoint, NoCrossoverError, SweepCurve, SweepPointError, SweepSpec
from tbma_aircomp.model import ConfigError, DataDistribution, DataVector, SystemConfig
from tbma_aircomp.schemes import Scheme


@pytest.mark.parametrize("scheme", list(Scheme))
@pytest.mark.parametrize(
    "dist", [DataDistribution.uniform(), DataDistribution.gaussian(40.0, 10.0), DataDistribution.geometric(0.1)]
)
def test_noiseless_trial_is_exact(scheme, dist):
    cfg = SystemConfig(K=1000, N=64, P=10.0, N0=1e-30)
    for seed in range(5):
        assert ex.run_trial(scheme, cfg, dist, seed).squared_error < 1e-18


def test_trial_deterministic_across_threads(uniform):
    cfg = SystemConfig.from_snr_db(1000, 64, 12.0)
    ref = [ex.run_trial(s, cfg, uniform, 42) for s in Scheme]
    with ThreadPoolExecutor(8) as pool:
        again = list(pool.map(lambda s: ex.run_trial(s, cfg, uniform, 42), Scheme))
    assert ref == again


def test_exhaustive_two_devices_two_values():
    cfg = SystemConfig(K=2, N=2, P=1.0, N0=1e-30)
    E_S = 0.5
    rng = np.random.default_rng(0)
    for scheme in Scheme:
        got = []
        for data in itertools.product([0, 1], repeat=2):
            hist = sc.tbma_encode(DataVector(list(data), 2), 2)
            _, est = ex._estimate(scheme, hist, cfg, E_S, rng)
            got.append(float(est))
        assert got == pytest.approx([0.0, 0.5, 0.5, 1.0], abs=1e-12)


def test_trial_dump_shapes(uniform):
    cfg = SystemConfig.from_snr_db(50, 8, 30.0)
    dump = ex.trial_dump(cfg, uniform, 3)
    assert sum(dump["counts"]) == 50
    assert len(dump["normalized_observations"]) == 8
    assert dump["projected_counts"] == dump["counts"]
    assert dump["estimate_lattice"] == dump["true_mean"]


def test_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec(snr_points_db=[1, 1])
    with pytest.raises(ConfigError):
        SweepSpec(snr_points_db=[2, 1])
    with pytest.raises(ConfigError):
        SweepSpec(trials=99)
    with pytest.raises(ConfigError):
        SweepSpec(schemes=())
    with pytest.raises(ConfigError):
        SweepSpec(K=0)


def test_sweep_da_and_naive_at_10db():
    spec = SweepSpec(snr_points_db=[10.0], trials=10_000, schemes=[Scheme.DA, Scheme.TBMA_NAIVE], base_seed=11)
    curve = ex.run_sweep(spec)
    da = curve.point(Scheme.DA, 10.0)
    naive = curve.point(Scheme.TBMA_NAIVE, 10.0)
    assert da.mse_empirical == pytest.approx(1.3335e-4, rel=0.05)
    assert naive.mse_empirical == pytest.approx(8.5344e-3, rel=0.05)
    for p in curve.points:
        assert p.ci95_low <= p.mse_empirical <= p.ci95_high
        assert p.trials_used == 10_000


def test_lattice_matches_naive_at_low_snr():
    spec = SweepSpec(
        snr_points_db=[0.0, 3.0], trials=50_000, schemes=[Scheme.TBMA_NAIVE, Scheme.TBMA_LATTICE], base_seed=5
    )
    curve = ex.run_sweep(spec)
    for snr in spec.snr_points_db:
        lat = curve.point(Scheme.TBMA_LATTICE, snr).mse_empirical
        naive = curve.point(Scheme.TBMA_NAIVE, snr).mse_empirical
        assert abs(lat / naive - 1) <= 0.2


def test_sweep_bit_identical_across_workers():
    spec = SweepSpec(snr_points_db=[5.0, 15.0, 19.0], trials=1000, chunk_size=128, max_trials=8000, base_seed=99)
    curves = [ex.run_sweep(spec, workers=w).points for w in (1, 4, 16)]
    assert curves[0] == curves[1] == curves[2]


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(ex.WORKERS_ENV, "3")
    assert ex.default_workers() == 3


def test_lattice_escalates_until_events():
    spec = SweepSpec(snr_points_db=[18.0], trials=200, chunk_size=100, schemes=[Scheme.TBMA_LATTICE], max_trials=10**6)
    p = ex.run_sweep(spec).points[0]
    assert p.error_events >= 50
    assert (p.ci95_high - p.ci95_low) / p.mse_empirical <= 0.3
    assert p.trials_used > 200


def test_escalation_respects_cap():
    spec = SweepSpec(snr_points_db=[30.0], trials=100, schemes=[Scheme.TBMA_LATTICE], max_trials=3000, chunk_size=256)
    p = ex.run_sweep(spec).points[0]
    assert p.trials_used == 3000
    assert p.mse_empirical == 0.0 and p.error_events == 0


def test_escalated_result_equals_direct_run():
    # a run that escalates to T trials equals a run started at T
    kw = dict(snr_points_db=[17.0], schemes=[Scheme.TBMA_LATTICE], chunk_size=64, base_seed=4)
    escalated = ex.run_sweep(SweepSpec(trials=100, max_trials=800, **kw)).points[0]
    direct = ex.run_sweep(SweepSpec(trials=escalated.trials_used, max_trials=escalated.trials_used, **kw)).points[0]
    assert escalated == direct


def test_theory_covered_by_ci():
    snrs = [0.0, 4.0, 8.0, 12.0, 16.0, 20.0, 24.0, 28.0]
    spec = SweepSpec(snr_points_db=snrs, trials=10_000, schemes=[Scheme.DA, Scheme.TBMA_NAIVE], base_seed=3)
    curve = ex.run_sweep(spec)
    z99 = norm.ppf(0.995)
    hits = 0
    for p in curve.points:
        half99 = (p.ci95_high - p.mse_empirical) * z99 / ex.Z95
        hits += abs(p.mse_theory - p.mse_empirical) <= half99
    assert hits >= 0.95 * len(curve.points)


def test_frozen_data_mode():
    spec = SweepSpec(snr_points_db=[10.0], trials=20_000, schemes=[Scheme.TBMA_NAIVE], freeze_data=True, base_seed=8)
    counts = ex.frozen_counts(spec)
    assert counts.sum() == 1000
    assert np.array_equal(counts, ex.frozen_counts(spec))
    p = ex.run_sweep(spec).points[0]
    assert p.mse_empirical == pytest.approx(p.mse_theory, rel=0.05)


def test_sweep_point_error_names_point(monkeypatch):
    def boom(*args, **kwargs):
        raise MemoryError

    monkeypatch.setattr(ex, "simulate_chunk", boom)
    with pytest.raises(SweepPointError, match="da at 7.0 dB"):
        ex.run_sweep(SweepSpec(snr_points_db=[7.0], trials=100, schemes=[Scheme.DA]))


def test_merge_is_order_independent():
    rng = np.random.default_rng(1)
    stats = [ex.ChunkStats(*rng.exponential(size=2) * 10.0 ** rng.integers(-8, 8), 10, 1) for _ in range(50)]
    a = ex.merge(stats)
    b = ex.merge(stats[::-1])
    assert a == b


def test_chunk_seeds_are_distinct():
    seeds = {
        tuple(ex.chunk_seed(0, s, i, c).generate_state(2)) for s in Scheme for i in range(3) for c in range(3)
    }
    assert len(seeds) == 27


def test_crossover_examples():
    spec = SweepSpec()
    snr = ex.crossover_search(spec, Scheme.DA, Scheme.TBMA_LATTICE)
    assert 16.0 <= snr <= 18.0
    with pytest.raises(NoCrossoverError, match="no crossover in range"):
        ex.crossover_search(spec, Scheme.DA, Scheme.TBMA_NAIVE)
    with pytest.raises(NoCrossoverError):
        ex.crossover_search(spec, Scheme.DA, Scheme.DA)


def test_crossover_resolution():
    spec = SweepSpec()
    coarse = ex.crossover_search(spec, Scheme.DA, Scheme.TBMA_LATTICE, resolution_db=0.1)
    fine = ex.crossover_search(spec, Scheme.DA, Scheme.TBMA_LATTICE, resolution_db=1e-6)
    assert abs(coarse - fine) <= 0.05


def test_empirical_crossover_interpolates():
    def pt(scheme, snr, mse):
        return CurvePoint(snr, scheme, mse, mse, mse, mse, 100)

    curve = SweepCurve(
        [pt(Scheme.DA, 0.0, 1.0), pt(Scheme.DA, 10.0, 1.0), pt(Scheme.TBMA_LATTICE, 0.0, np.e), pt(Scheme.TBMA_LATTICE, 10.0, 1 / np.e)]
    )
    assert ex.empirical_crossover(curve, Scheme.DA, Scheme.TBMA_LATTICE) == pytest.approx(5.0)


def test_naive_n_scaling_9db():
    kw = dict(snr_points_db=[10.0], trials=10_000, schemes=[Scheme.TBMA_NAIVE], base_seed=21)
    m64 = ex.run_sweep(SweepSpec(N=64, **kw)).points[0].mse_empirical
    m128 = ex.run_sweep(SweepSpec(N=128, **kw)).points[0].mse_empirical
    assert 10 * np.log10(m128 / m64) == pytest.approx(9.0, abs=0.5)
