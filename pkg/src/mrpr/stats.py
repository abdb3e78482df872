"""Online statistics: mean/variance estimators, a scalar Kalman filter, and
the scan-based offered-load estimator.

Every estimator exposes ``update(sample)``, ``count``, ``mean`` and
``variance``. Routing costs only ever consume (mean, variance) pairs, so the
estimator backing them is pluggable: ``MeanVarEstimator`` (the default) and
``KalmanMeanEstimator`` both satisfy the contract.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Protocol

from .errors import InvariantViolation


class Estimator(Protocol):
    count: int

    def update(self, sample: float) -> None: ...

    @property
    def mean(self) -> float: ...

    @property
    def variance(self) -> float: ...


@dataclass
class MeanVarEstimator:
    """Running mean and unbiased sample variance (Welford accumulation).

    ``variance`` is m2/(count-1) for count >= 2 and 0.0 otherwise, matching
    the two-pass sample statistics of everything seen so far.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, sample: float) -> None:
        if not math.isfinite(sample):
            raise ValueError(f"non-finite sample {sample!r}")
        self.count += 1
        delta = sample - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (sample - self.mean)

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return max(0.0, self.m2 / (self.count - 1))


@dataclass
class ScalarKalman:
    """Scalar random-walk-state Kalman filter.

    Predict inflates the error covariance by ``process_noise`` (q); update
    blends the measurement in with gain prior/(prior + r). With q = 0 and a
    flat prior the estimate converges to the arithmetic mean of the
    measurements.
    """

    estimate: float = 0.0
    error_cov: float = 1.0
    process_noise: float = 0.0
    measurement_noise: float = 1.0

    def __post_init__(self) -> None:
        if self.measurement_noise <= 0:
            raise ValueError("measurement noise must be positive")
        if self.process_noise < 0 or self.error_cov < 0:
            raise ValueError("covariances must be nonnegative")

    def update(self, measurement: float) -> None:
        if not math.isfinite(measurement):
            raise ValueError(f"non-finite measurement {measurement!r}")
        prior = self.error_cov + self.process_noise
        gain = prior / (prior + self.measurement_noise)
        self.estimate += gain * (measurement - self.estimate)
        # (1 - gain) * prior, written to avoid cancellation at huge priors
        self.error_cov = prior * self.measurement_noise / (prior + self.measurement_noise)


@dataclass
class KalmanMeanEstimator:
    """Estimator adapter: the mean tracks a ScalarKalman, the variance is the
    plain sample variance of the stream (the filter itself only models the
    mean)."""

    filter: ScalarKalman
    spread: MeanVarEstimator = field(default_factory=MeanVarEstimator)

    @property
    def count(self) -> int:
        return self.spread.count

    def update(self, sample: float) -> None:
        self.filter.update(sample)
        self.spread.update(sample)

    @property
    def mean(self) -> float:
        return self.filter.estimate

    @property
    def variance(self) -> float:
        return self.spread.variance


@dataclass
class PriorBackedEstimator:
    """Report configured prior (mean, variance) until the wrapped estimator
    has at least two samples.

    Cold-start zeros would produce nonsense costs (the failure bound divides
    by mean gaps), so fresh estimators fall back to the configured process
    parameters instead.
    """

    inner: Estimator
    prior_mean: float
    prior_variance: float = 0.0

    @property
    def count(self) -> int:
        return self.inner.count

    def update(self, sample: float) -> None:
        self.inner.update(sample)

    @property
    def mean(self) -> float:
        return self.inner.mean if self.inner.count >= 2 else self.prior_mean

    @property
    def variance(self) -> float:
        return self.inner.variance if self.inner.count >= 2 else self.prior_variance


class OfferedLoadEstimate(NamedTuple):
    n_r: float
    b_r: float
    lam_r: float | None  # None when every scan saw the resource saturated


class OccupancyScanWindow:
    """Sliding window of occupancy scans for one resource.

    ``observe`` appends the current number of busy units; the window keeps
    the most recent ``length`` samples.
    """

    def __init__(self, capacity: int, scan_interval: float, length: int) -> None:
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        if scan_interval <= 0:
            raise ValueError("scan interval must be positive")
        if length < 1:
            raise ValueError("window length must be >= 1")
        self.capacity = capacity
        self.scan_interval = scan_interval
        self._samples: deque[int] = deque(maxlen=length)

    def observe(self, busy: int) -> None:
        if busy < 0 or busy > self.capacity:
            raise InvariantViolation(
                f"scan sample {busy} outside [0, {self.capacity}]")
        self._samples.append(busy)

    @property
    def samples(self) -> tuple[int, ...]:
        return tuple(self._samples)

    def __len__(self) -> int:
        return len(self._samples)


def estimate_offered_load(window: OccupancyScanWindow, mean_holding: float) -> OfferedLoadEstimate:
    """Reconstruct the offered arrival rate of a loss resource from scans.

    N_r is the mean busy count, B_r the fraction of scans that saw the
    resource full, and lam_r = N_r / (h (1 - B_r)) inverts the carried-load
    relation. A window that was saturated on every scan has no finite rate
    estimate; lam_r is None in that case.
    """
    if len(window) == 0:
        raise ValueError("empty scan window")
    if mean_holding <= 0:
        raise ValueError("mean holding time must be positive")
    samples = window.samples
    n_r = sum(samples) / len(samples)
    b_r = sum(1 for s in samples if s == window.capacity) / len(samples)
    if b_r >= 1.0:
        return OfferedLoadEstimate(n_r, b_r, None)
    return OfferedLoadEstimate(n_r, b_r, n_r / (mean_holding * (1.0 - b_r)))


class ElementStats:
    """Per-replication statistics database.

    Holds one failure inter-arrival estimator per link and per router, lazy
    per-pair holding and arrival inter-arrival estimators, and one occupancy
    scan window per resource (link channels; converter banks in spn mode).
    """

    def __init__(self, *, make_estimator, failure_prior, holding_prior,
                 arrival_prior, scan_interval: float, window_length: int) -> None:
        # make_estimator() -> Estimator; *_prior are (mean, variance) pairs,
        # failure_prior keyed by reliability class.
        self._make = make_estimator
        self._failure_prior = failure_prior
        self._holding_prior = holding_prior
        self._arrival_prior = arrival_prior
        self.scan_interval = scan_interval
        self.window_length = window_length
        self.link_failure: dict[int, PriorBackedEstimator] = {}
        self.router_failure: dict[int, PriorBackedEstimator] = {}
        self.holding_by_pair: dict[tuple[int, int], PriorBackedEstimator] = {}
        self.arrival_by_pair: dict[tuple[int, int], PriorBackedEstimator] = {}
        self.link_occupancy: dict[int, OccupancyScanWindow] = {}
        self.converter_occupancy: dict[int, OccupancyScanWindow] = {}
        self.last_failure: dict[tuple[str, int], float] = {}
        self.last_arrival: dict[tuple[int, int], float] = {}

    @classmethod
    def for_topology(cls, topology, *, make_estimator, failure_prior,
                     holding_prior, arrival_prior, scan_interval: float,
                     window_length: int) -> "ElementStats":
        stats = cls(make_estimator=make_estimator, failure_prior=failure_prior,
                    holding_prior=holding_prior, arrival_prior=arrival_prior,
                    scan_interval=scan_interval, window_length=window_length)
        for link in topology.links:
            mean, var = failure_prior[link.reliability_class]
            stats.link_failure[link.id] = PriorBackedEstimator(
                make_estimator(), mean, var)
            stats.link_occupancy[link.id] = OccupancyScanWindow(
                link.capacity, scan_interval, window_length)
        for router in topology.routers:
            mean, var = failure_prior[router.reliability_class]
            stats.router_failure[router.id] = PriorBackedEstimator(
                make_estimator(), mean, var)
            if router.converter_count > 0:
                stats.converter_occupancy[router.id] = OccupancyScanWindow(
                    router.converter_count, scan_interval, window_length)
        return stats

    def holding(self, s: int, d: int) -> PriorBackedEstimator:
        key = (s, d)
        if key not in self.holding_by_pair:
            mean, var = self._holding_prior
            self.holding_by_pair[key] = PriorBackedEstimator(self._make(), mean, var)
        return self.holding_by_pair[key]

    def arrival(self, s: int, d: int) -> PriorBackedEstimator:
        key = (s, d)
        if key not in self.arrival_by_pair:
            mean, var = self._arrival_prior
            self.arrival_by_pair[key] = PriorBackedEstimator(self._make(), mean, var)
        return self.arrival_by_pair[key]

    def record_failure(self, kind: str, element_id: int, now: float) -> None:
        """Feed the element's inter-arrival estimator with (now - last)."""
        key = (kind, element_id)
        sample = now - self.last_failure.get(key, 0.0)
        self.last_failure[key] = now
        est = self.link_failure[element_id] if kind == "link" else self.router_failure[element_id]
        est.update(sample)

    def record_arrival(self, s: int, d: int, now: float) -> None:
        key = (s, d)
        last = self.last_arrival.get(key)
        self.last_arrival[key] = now
        if last is not None:
            self.arrival(s, d).update(now - last)

    def offered_load(self, window: OccupancyScanWindow, mean_holding: float) -> float:
        """Offered load in Erlangs for live cost evaluation; 0 before any
        scan, capacity when the window reports saturation."""
        if len(window) == 0:
            return 0.0
        est = estimate_offered_load(window, mean_holding)
        if est.lam_r is None:
            return float(window.capacity)
        return est.lam_r * mean_holding
