import math
import random
import statistics

import pytest
from hypothesis import given, settings, strategies as st

from mrpr.errors import InvariantViolation
from mrpr.stats import (KalmanMeanEstimator, MeanVarEstimator,
                        OccupancyScanWindow, PriorBackedEstimator,
                        ScalarKalman, estimate_offered_load)

finite_floats = st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False)


def feed(est, samples):
    for s in samples:
        est.update(s)
    return est


class TestMeanVar:
    def test_single_sample(self):
        est = feed(MeanVarEstimator(), [5.0])
        assert est.mean == 5.0
        assert est.variance == 0.0

    def test_hand_computed(self):
        est = feed(MeanVarEstimator(), [2.0, 4.0, 6.0])
        # two-pass oracle: mean 4, sum of squared deviations 8, n-1 = 2
        assert est.mean == pytest.approx(4.0, rel=1e-12)
        assert est.variance == pytest.approx(4.0, rel=1e-12)

    def test_constant_stream(self):
        est = feed(MeanVarEstimator(), [3.0] * 1000)
        assert est.mean == pytest.approx(3.0)
        assert est.variance == pytest.approx(0.0, abs=1e-18)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            MeanVarEstimator().update(math.nan)
        with pytest.raises(ValueError):
            MeanVarEstimator().update(math.inf)

    @given(st.lists(finite_floats, min_size=2, max_size=200))
    def test_matches_two_pass_oracle(self, samples):
        est = feed(MeanVarEstimator(), samples)
        mean = sum(samples) / len(samples)
        var = sum((s - mean) ** 2 for s in samples) / (len(samples) - 1)
        assert est.mean == pytest.approx(mean, rel=1e-9, abs=1e-9)
        assert est.variance == pytest.approx(var, rel=1e-9, abs=1e-9)

    def test_long_stream_against_stdlib(self):
        rng = random.Random(7)
        samples = [rng.expovariate(0.5) for _ in range(100_000)]
        est = feed(MeanVarEstimator(), samples)
        assert est.mean == pytest.approx(statistics.fmean(samples), rel=1e-9)
        assert est.variance == pytest.approx(statistics.variance(samples), rel=1e-9)

    @given(st.lists(finite_floats, min_size=1, max_size=50))
    def test_variance_never_negative(self, samples):
        assert feed(MeanVarEstimator(), samples).variance >= 0.0


class TestScalarKalman:
    def test_tiny_measurement_noise_tracks_measurement(self):
        kf = ScalarKalman(estimate=100.0, error_cov=1.0, process_noise=0.0,
                          measurement_noise=1e-12)
        kf.update(3.0)
        assert kf.estimate == pytest.approx(3.0, abs=1e-9)

    def test_flat_prior_gives_batch_mean(self):
        kf = ScalarKalman(estimate=0.0, error_cov=1e12, process_noise=0.0,
                          measurement_noise=1.0)
        for z in (1.0, 2.0, 3.0):
            kf.update(z)
        assert kf.estimate == pytest.approx(2.0, rel=1e-9)

    def test_running_mean_after_many_updates(self):
        r = 2.5
        kf = ScalarKalman(estimate=0.0, error_cov=1e12 * r, process_noise=0.0,
                          measurement_noise=r)
        rng = random.Random(3)
        samples = [rng.uniform(1.0, 5.0) for _ in range(50)]
        for z in samples:
            kf.update(z)
        assert kf.estimate == pytest.approx(statistics.fmean(samples), rel=1e-9)

    @given(st.floats(min_value=0.01, max_value=100.0),
           st.floats(min_value=0.0, max_value=100.0),
           st.lists(finite_floats, min_size=1, max_size=20))
    def test_covariance_contracts_without_process_noise(self, r, p0, zs):
        kf = ScalarKalman(estimate=0.0, error_cov=p0, process_noise=0.0,
                          measurement_noise=r)
        for z in zs:
            before = kf.error_cov
            kf.update(z)
            assert kf.error_cov <= before + 1e-15

    def test_nonpositive_measurement_noise_rejected(self):
        with pytest.raises(ValueError):
            ScalarKalman(measurement_noise=0.0)
        with pytest.raises(ValueError):
            ScalarKalman(measurement_noise=-1.0)


def test_kalman_mean_estimator_contract():
    est = KalmanMeanEstimator(ScalarKalman(estimate=0.0, error_cov=1e12,
                                           process_noise=0.0,
                                           measurement_noise=1.0))
    feed(est, [2.0, 4.0, 6.0])
    assert est.count == 3
    assert est.mean == pytest.approx(4.0, rel=1e-9)
    assert est.variance == pytest.approx(4.0, rel=1e-9)


def test_prior_backed_switchover():
    est = PriorBackedEstimator(MeanVarEstimator(), prior_mean=10.0,
                               prior_variance=100.0)
    assert (est.mean, est.variance) == (10.0, 100.0)
    est.update(2.0)
    assert (est.mean, est.variance) == (10.0, 100.0)  # one sample: still prior
    est.update(4.0)
    assert est.mean == pytest.approx(3.0)
    assert est.variance == pytest.approx(2.0)


class TestScanWindow:
    def test_window_keeps_most_recent(self):
        win = OccupancyScanWindow(capacity=3, scan_interval=0.1, length=4)
        for n in (0, 1, 2, 3, 1):
            win.observe(n)
        assert win.samples == (1, 2, 3, 1)

    def test_sample_above_capacity_rejected(self):
        win = OccupancyScanWindow(capacity=3, scan_interval=0.1, length=4)
        with pytest.raises(InvariantViolation):
            win.observe(4)

    def test_bad_construction(self):
        with pytest.raises(ValueError):
            OccupancyScanWindow(capacity=0, scan_interval=0.1, length=4)
        with pytest.raises(ValueError):
            OccupancyScanWindow(capacity=1, scan_interval=0.0, length=4)
        with pytest.raises(ValueError):
            OccupancyScanWindow(capacity=1, scan_interval=0.1, length=0)


def _window(samples, capacity=3, length=None):
    win = OccupancyScanWindow(capacity=capacity, scan_interval=0.1,
                              length=length or max(len(samples), 1))
    for s in samples:
        win.observe(s)
    return win


class TestOfferedLoad:
    def test_idle_resource(self):
        est = estimate_offered_load(_window([0, 0, 0, 0]), mean_holding=2.0)
        assert est == (0.0, 0.0, 0.0)

    def test_hand_computed_light_load(self):
        est = estimate_offered_load(_window([1, 1, 2, 2]), mean_holding=2.0)
        assert est.n_r == pytest.approx(1.5)
        assert est.b_r == 0.0
        assert est.lam_r == pytest.approx(1.5 / (2.0 * 1.0))

    def test_hand_computed_heavy_load(self):
        est = estimate_offered_load(_window([3, 3, 3, 1]), mean_holding=1.0)
        assert est.n_r == pytest.approx(2.5)
        assert est.b_r == pytest.approx(0.75)
        assert est.lam_r == pytest.approx(2.5 / (1.0 * 0.25))

    def test_saturated_window_has_no_rate(self):
        est = estimate_offered_load(_window([3, 3, 3]), mean_holding=1.0)
        assert est.b_r == 1.0
        assert est.lam_r is None

    def test_preconditions(self):
        with pytest.raises(ValueError):
            estimate_offered_load(
                OccupancyScanWindow(capacity=3, scan_interval=0.1, length=4), 1.0)
        with pytest.raises(ValueError):
            estimate_offered_load(_window([1]), 0.0)


def simulate_mmcc_scans(servers: int, offered_load: float, scans: int,
                        scan_interval: float, seed: int) -> list[int]:
    """Independent oracle: event-driven M/M/c/c loss system, scanned at a
    fixed interval. Arrival rate = offered_load (unit mean holding)."""
    rng = random.Random(seed)
    now, busy = 0.0, 0
    departures: list[float] = []
    next_arrival = rng.expovariate(offered_load)
    samples = []
    next_scan = scan_interval
    while len(samples) < scans:
        next_dep = min(departures) if departures else math.inf
        if next_scan <= min(next_arrival, next_dep):
            now = next_scan
            samples.append(busy)
            next_scan += scan_interval
        elif next_arrival <= next_dep:
            now = next_arrival
            if busy < servers:
                busy += 1
                departures.append(now + rng.expovariate(1.0))
            next_arrival = now + rng.expovariate(offered_load)
        else:
            now = next_dep
            departures.remove(next_dep)
            busy -= 1
    return samples


@settings(deadline=None, max_examples=3)
@given(st.integers(0, 1000))
def test_offered_load_recovers_known_rate(seed):
    true_load = 2.0
    samples = simulate_mmcc_scans(3, true_load, scans=10_000,
                                  scan_interval=0.1, seed=seed)
    win = OccupancyScanWindow(capacity=3, scan_interval=0.1, length=10_000)
    for s in samples:
        win.observe(s)
    est = estimate_offered_load(win, mean_holding=1.0)
    assert est.lam_r is not None
    assert est.lam_r * 1.0 == pytest.approx(true_load, rel=0.10)
