"""Discrete-event engine: Poisson lightpath requests, exponential holding
times, random element failures with forced rerouting, and periodic
occupancy scans.

One replication is strictly single threaded and fully determined by
(config, topology, algorithm, seed). Three independent random streams keep
replications comparable across algorithms: the arrival stream (inter-arrival
times, traffic pairs, holding times), the failure stream, and the routing
stream (tie-breaks, random wavelength picks). The first two never depend on
routing decisions, so two algorithms run against the same seed see the same
requests and the same failures.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass

from . import routing
from .errors import ConfigurationError, InvariantViolation
from .seeding import mix
from .stats import ElementStats, KalmanMeanEstimator, MeanVarEstimator, ScalarKalman
from .state import Lightpath, NetworkState
from .topology import MODE_SPN, MODES, RELIABLE, UNRELIABLE, Topology

# event kinds, in tie-break priority order
FAILURE = "failure"
DEPARTURE = "departure"
ARRIVAL = "arrival"
SCAN = "scan"
_PRIORITY = {FAILURE: 0, DEPARTURE: 1, ARRIVAL: 2, SCAN: 3}

ESTIMATOR_MEANVAR = "meanvar"
ESTIMATOR_KALMAN = "kalman"
ESTIMATORS = (ESTIMATOR_MEANVAR, ESTIMATOR_KALMAN)


def sample_exponential(rng: random.Random, mean: float) -> float:
    """Inverse-transform draw from an exponential with the given mean."""
    if mean <= 0:
        raise ValueError("mean must be positive")
    return rng.expovariate(1.0 / mean)


def load_per_wavelength(lambda_total: float, mean_hops: float,
                        wavelengths: int, fiber_count: int) -> float:
    """Network load normalized per wavelength: lambda_T * H / (W * L)."""
    if wavelengths <= 0 or fiber_count <= 0:
        raise ValueError("wavelength and fiber counts must be positive")
    return lambda_total * mean_hops / (wavelengths * fiber_count)


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of a single replication."""

    requests: int
    lambda_total: float
    mean_holding: float = 1.0
    failure_rate_reliable: float = 0.0
    failure_rate_unreliable: float = 0.0
    wavelength_policy: str = routing.FIRST_FIT
    failure_model: str = "tchebycheff"
    repack_threshold: float = 0.5
    wi_repack: str = "zero"
    estimator: str = ESTIMATOR_MEANVAR
    kalman_q: float = 0.0
    kalman_r: float = 1.0
    scan_interval: float | None = None  # default: 0.1 * mean_holding
    window_length: int = 100
    warmup_fraction: float = 0.1
    traffic_pairs: tuple[tuple[str, str], ...] | None = None
    mode_override: str | None = None
    check_invariants: bool = False

    def __post_init__(self) -> None:
        if self.requests < 1:
            raise ConfigurationError("request budget must be >= 1")
        if self.lambda_total <= 0:
            raise ConfigurationError("arrival rate must be positive")
        if self.mean_holding <= 0:
            raise ConfigurationError("mean holding time must be positive")
        if self.failure_rate_reliable < 0 or self.failure_rate_unreliable < 0:
            raise ConfigurationError("failure rates must be nonnegative")
        if self.wavelength_policy not in routing.POLICIES:
            raise ConfigurationError(f"unknown policy {self.wavelength_policy!r}")
        if self.estimator not in ESTIMATORS:
            raise ConfigurationError(f"unknown estimator {self.estimator!r}")
        if self.estimator == ESTIMATOR_KALMAN and self.kalman_r <= 0:
            raise ConfigurationError("kalman measurement noise must be positive")
        if self.scan_interval is not None and self.scan_interval <= 0:
            raise ConfigurationError("scan interval must be positive")
        if self.window_length < 1:
            raise ConfigurationError("scan window length must be >= 1")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigurationError("warmup fraction must be in [0, 1)")
        if self.mode_override is not None and self.mode_override not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode_override!r}")

    @property
    def effective_scan_interval(self) -> float:
        return self.scan_interval if self.scan_interval is not None else 0.1 * self.mean_holding


@dataclass
class Metrics:
    """Counters and derived probabilities for one replication. Warm-up
    requests shape network state but are excluded from every counter."""

    offered: int = 0
    blocked: int = 0
    accepted: int = 0
    reconfig_events: int = 0
    reconfig_success: int = 0
    reconfig_dropped: int = 0
    blocking_probability: float = 0.0
    reconfiguration_probability: float = 0.0
    mean_hops: float = 0.0
    duration: float = 0.0

    def validate(self) -> None:
        if self.offered != self.blocked + self.accepted:
            raise InvariantViolation("offered != blocked + accepted")
        if self.reconfig_events != self.reconfig_success + self.reconfig_dropped:
            raise InvariantViolation("reconfiguration counters inconsistent")
        for p in (self.blocking_probability, self.reconfiguration_probability):
            if not 0.0 <= p <= 1.0:
                raise InvariantViolation(f"probability {p} outside [0, 1]")


class Simulation:
    """One seeded replication. Use ``run()`` for the full event loop, or
    drive ``handle_arrival`` / ``inject_failure`` / ``scan_occupancy``
    directly in tests."""

    def __init__(self, config: SimulationConfig, topology: Topology,
                 algorithm: str, seed: int, trace=None) -> None:
        if algorithm not in routing.ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {algorithm!r}")
        if config.mode_override is not None and config.mode_override != topology.mode:
            topology = Topology(routers=topology.routers, links=topology.links,
                                mode=config.mode_override)
        self.config = config
        self.topology = topology
        self.algorithm = algorithm
        self.seed = seed
        self.trace = trace
        self.rng_arrivals = random.Random(mix(seed, 0xA11))
        self.rng_failures = random.Random(mix(seed, 0xFA1))
        self.rng_routing = random.Random(mix(seed, 0x207))
        self.state = NetworkState(topology)
        self.stats = self._make_stats()
        self.pairs = self._resolve_pairs()
        self.now = 0.0
        self._queue: list = []
        self._seq = 0
        self._next_lp_id = 1
        self._arrivals_processed = 0
        self._warmup_count = int(config.warmup_fraction * config.requests)
        self._hop_sum = 0
        self.metrics = Metrics()
        self._schedule_initial_events()

    # -- construction helpers ---------------------------------------------

    def _make_stats(self) -> ElementStats:
        cfg = self.config

        if cfg.estimator == ESTIMATOR_KALMAN:
            def make():
                kf = ScalarKalman(estimate=0.0, error_cov=1e12 * cfg.kalman_r,
                                  process_noise=cfg.kalman_q,
                                  measurement_noise=cfg.kalman_r)
                return KalmanMeanEstimator(kf)
        else:
            def make():
                return MeanVarEstimator()

        def prior_for_rate(rate: float) -> tuple[float, float]:
            if rate <= 0:
                return (math.inf, 0.0)
            mean = 1.0 / rate
            return (mean, mean * mean)  # exponential process: var = mean^2

        failure_prior = {
            RELIABLE: prior_for_rate(cfg.failure_rate_reliable),
            UNRELIABLE: prior_for_rate(cfg.failure_rate_unreliable),
        }
        holding_prior = (cfg.mean_holding, cfg.mean_holding ** 2)
        pair_count = max(1, len(self.topology.routers) * (len(self.topology.routers) - 1))
        pair_mean = pair_count / cfg.lambda_total
        arrival_prior = (pair_mean, pair_mean ** 2)
        return ElementStats.for_topology(
            self.topology, make_estimator=make, failure_prior=failure_prior,
            holding_prior=holding_prior, arrival_prior=arrival_prior,
            scan_interval=cfg.effective_scan_interval,
            window_length=cfg.window_length)

    def _resolve_pairs(self) -> list[tuple[int, int]]:
        if self.config.traffic_pairs is None:
            ids = [r.id for r in self.topology.routers]
            return [(s, d) for s in ids for d in ids if s != d]
        pairs = []
        for s_label, d_label in self.config.traffic_pairs:
            s, d = self.topology.router_id(s_label), self.topology.router_id(d_label)
            if s == d:
                raise ConfigurationError(f"traffic pair {s_label}->{d_label} is a loop")
            pairs.append((s, d))
        if not pairs:
            raise ConfigurationError("traffic pair list is empty")
        return pairs

    def _schedule_initial_events(self) -> None:
        self._schedule_next_arrival()
        for link in self.topology.links:
            self._schedule_failure("link", link.id, link.reliability_class)
        for router in self.topology.routers:
            self._schedule_failure("router", router.id, router.reliability_class)
        self._push(self.config.effective_scan_interval, SCAN, None)

    def _failure_rate(self, reliability_class: str) -> float:
        if reliability_class == RELIABLE:
            return self.config.failure_rate_reliable
        return self.config.failure_rate_unreliable

    def _schedule_failure(self, kind: str, element_id: int, reliability_class: str) -> None:
        rate = self._failure_rate(reliability_class)
        if rate <= 0:
            return
        dt = sample_exponential(self.rng_failures, 1.0 / rate)
        self._push(self.now + dt, FAILURE, (kind, element_id, reliability_class))

    def _schedule_next_arrival(self) -> None:
        # All arrival-stream draws happen here, in a fixed order, so the
        # request sequence is identical for every algorithm under one seed.
        dt = sample_exponential(self.rng_arrivals, 1.0 / self.config.lambda_total)
        s, d = self.pairs[self.rng_arrivals.randrange(len(self.pairs))]
        holding = sample_exponential(self.rng_arrivals, self.config.mean_holding)
        self._push(self.now + dt, ARRIVAL, (s, d, holding))

    def _push(self, time: float, kind: str, payload) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (time, _PRIORITY[kind], self._seq, kind, payload))

    def _trace(self, text: str) -> None:
        if self.trace is not None:
            self.trace.write(f"{self.now:.9f} {text}\n")

    # -- event handlers ----------------------------------------------------

    def _route(self, s: int, d: int) -> routing.RouteDecision:
        cfg = self.config
        if self.algorithm == routing.MRPR:
            return routing.route_mrpr(
                self.topology, self.state, self.stats, s, d,
                policy=cfg.wavelength_policy, rng=self.rng_routing,
                failure_model=cfg.failure_model,
                repack_threshold=cfg.repack_threshold,
                wi_repack=cfg.wi_repack, mean_holding=cfg.mean_holding)
        if self.algorithm == routing.AUR:
            return routing.route_aur(self.topology, self.state, s, d,
                                     policy=cfg.wavelength_policy,
                                     rng=self.rng_routing)
        return routing.route_llr(self.topology, self.state, s, d,
                                 policy=cfg.wavelength_policy,
                                 rng=self.rng_routing)

    def handle_arrival(self, s: int, d: int, holding: float) -> routing.RouteDecision:
        self._arrivals_processed += 1
        counted = self._arrivals_processed > self._warmup_count
        self.stats.record_arrival(s, d, self.now)
        decision = self._route(s, d)
        if counted:
            self.metrics.offered += 1
        if decision.accepted:
            lp = Lightpath(id=self._next_lp_id, source=s, dest=d,
                           hops=list(decision.hops),
                           conversions=list(decision.conversions),
                           departure_time=self.now + holding, counted=counted)
            self._next_lp_id += 1
            self.state.occupy(lp)
            self._push(lp.departure_time, DEPARTURE, lp.id)
            self.stats.holding(s, d).update(holding)
            if counted:
                self.metrics.accepted += 1
                self._hop_sum += len(lp.hops)
        elif counted:
            self.metrics.blocked += 1
        self._trace(f"arrival s={self.topology.label(s)} d={self.topology.label(d)}"
                    f" outcome={decision.outcome} hops={len(decision.hops)}")
        return decision

    def handle_departure(self, lp_id: int) -> None:
        lp = self.state.active.get(lp_id)
        if lp is None or lp.departure_time > self.now:
            return  # lightpath was dropped by a failure; stale event
        self.state.release(lp)
        self._trace(f"departure lp={lp_id}")

    def inject_failure(self, kind: str, element_id: int) -> tuple[int, int]:
        """Displace every lightpath on the element and re-route each one
        with the replication's algorithm; returns (rerouted, dropped). The
        element is excluded from the immediate re-route attempts and back in
        service when the event ends."""
        self.stats.record_failure(kind, element_id, self.now)
        if kind == "link":
            self.state.failed_links.add(element_id)
            affected = [lp for lp in self.state.active.values()
                        if any(l == element_id for l, _ in lp.hops)]
        else:
            self.state.failed_routers.add(element_id)
            affected = [lp for lp in self.state.active.values()
                        if element_id in self.state.routers_on_path(lp)]
        affected.sort(key=lambda lp: lp.id)
        for lp in affected:
            self.state.release(lp)
        rerouted = dropped = 0
        for lp in affected:
            if lp.counted:
                self.metrics.reconfig_events += 1
            decision = self._route(lp.source, lp.dest)
            if decision.accepted:
                lp.hops = list(decision.hops)
                lp.conversions = list(decision.conversions)
                self.state.occupy(lp)  # departure time unchanged
                rerouted += 1
                if lp.counted:
                    self.metrics.reconfig_success += 1
            else:
                dropped += 1
                if lp.counted:
                    self.metrics.reconfig_dropped += 1
        if kind == "link":
            self.state.failed_links.discard(element_id)
        else:
            self.state.failed_routers.discard(element_id)
        self._trace(f"failure {kind}={element_id} displaced={len(affected)}"
                    f" rerouted={rerouted} dropped={dropped}")
        return rerouted, dropped

    def scan_occupancy(self) -> None:
        for link in self.topology.links:
            self.stats.link_occupancy[link.id].observe(
                self.state.occupied_channel_count(link.id))
        if self.topology.mode == MODE_SPN:
            for router in self.topology.routers:
                if router.converter_count > 0:
                    self.stats.converter_occupancy[router.id].observe(
                        self.state.converters_in_use[router.id])
        self._trace("scan")

    # -- main loop ---------------------------------------------------------

    def run(self) -> Metrics:
        budget = self.config.requests
        while self._arrivals_processed < budget:
            time, _, _, kind, payload = heapq.heappop(self._queue)
            self.now = time
            if kind == ARRIVAL:
                s, d, holding = payload
                self.handle_arrival(s, d, holding)
                if self._arrivals_processed < budget:
                    self._schedule_next_arrival()
            elif kind == DEPARTURE:
                self.handle_departure(payload)
            elif kind == FAILURE:
                elem_kind, element_id, reliability_class = payload
                self.inject_failure(elem_kind, element_id)
                self._schedule_failure(elem_kind, element_id, reliability_class)
            else:
                self.scan_occupancy()
                self._push(self.now + self.config.effective_scan_interval, SCAN, None)
            if self.config.check_invariants:
                self.state.check_conservation()
        m = self.metrics
        m.duration = self.now
        if m.offered:
            m.blocking_probability = m.blocked / m.offered
        if m.accepted:
            m.reconfiguration_probability = m.reconfig_events / m.accepted
            m.mean_hops = self._hop_sum / m.accepted
        m.validate()
        return m


def run(config: SimulationConfig, topology: Topology, algorithm: str,
        seed: int, trace=None) -> Metrics:
    """Run one replication to its request budget and return its metrics."""
    return Simulation(config, topology, algorithm, seed, trace=trace).run()
