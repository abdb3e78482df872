"""Experiment driver: config files, parameter sweeps, CSV emission, and
replication summaries.

Config files are plain ``key = value`` text; ``#`` starts a comment. Lists
are comma separated, booleans are ``true``/``false``, and rates accept
``a/b`` fractions (``failure_rate_unreliable = 1/1500``). Every field of
ExperimentConfig is settable; unknown keys are rejected.

Sweep rows are written with a fixed column order and full-precision floats:

    algorithm,lambda_T,load_per_wavelength,reliability_ratio,seed,offered,
    blocked,accepted,reconfig_events,blocking_prob,reconfig_prob,wallclock_s

Reruns of the same config are byte identical; wallclock_s is 0.0 unless
timing is explicitly requested, because measured wall time is the one
nondeterministic quantity in a row.
"""

from __future__ import annotations

import csv
import io
import math
import random
import statistics
import time
from dataclasses import dataclass, fields, replace

from . import routing, simulator
from .errors import ConfigurationError
from .seeding import mix
from .topology import Topology, load_topology

SCOPE_ALL = "all"
SCOPE_ROUTERS = "routers"
SCOPES = (SCOPE_ALL, SCOPE_ROUTERS)

CLASSES_PER_REPLICATION = "per_replication"
CLASSES_FIXED = "fixed"
CLASS_MODES = (CLASSES_PER_REPLICATION, CLASSES_FIXED)

CSV_HEADER = ("algorithm", "lambda_T", "load_per_wavelength",
              "reliability_ratio", "seed", "offered", "blocked", "accepted",
              "reconfig_events", "blocking_prob", "reconfig_prob", "wallclock_s")

SUMMARY_HEADER = ("algorithm", "lambda_T", "reliability_ratio", "n",
                  "load_per_wavelength", "blocking_prob_mean", "blocking_prob_se",
                  "reconfig_prob_mean", "reconfig_prob_se",
                  "mrpr_reconfig_improvement")

NA = "NA"


@dataclass(frozen=True)
class ExperimentConfig:
    topology_path: str
    loads: tuple[float, ...]
    requests: int
    algorithms: tuple[str, ...] = routing.ALGORITHMS
    reliability_ratios: tuple[float, ...] = (0.0,)
    replications: int = 10
    base_seed: int = 1
    mean_holding: float = 1.0
    failure_rate_reliable: float = 1.0 / 1000.0
    failure_rate_unreliable: float = 1.0 / 1500.0
    swap_failure_rates: bool = False
    reliability_scope: str = SCOPE_ALL
    class_assignment: str = CLASSES_PER_REPLICATION
    wavelength_policy: str = routing.FIRST_FIT
    failure_model: str = "tchebycheff"
    repack_threshold: float = 0.5
    wi_repack: str = "zero"
    estimator: str = simulator.ESTIMATOR_MEANVAR
    kalman_q: float = 0.0
    kalman_r: float = 1.0
    scan_interval: float | None = None
    window_length: int = 100
    warmup_fraction: float = 0.1
    traffic_pairs: tuple[tuple[str, str], ...] | None = None
    mode_override: str | None = None
    check_invariants: bool = False

    def __post_init__(self) -> None:
        if not self.loads:
            raise ConfigurationError("load sweep must not be empty")
        if any(l <= 0 for l in self.loads):
            raise ConfigurationError("loads must be positive")
        if not self.algorithms:
            raise ConfigurationError("algorithm list must not be empty")
        for alg in self.algorithms:
            if alg not in routing.ALGORITHMS:
                raise ConfigurationError(f"unknown algorithm {alg!r}")
        if not self.reliability_ratios:
            raise ConfigurationError("reliability ratio sweep must not be empty")
        if any(not 0.0 <= r <= 1.0 for r in self.reliability_ratios):
            raise ConfigurationError("reliability ratios must be in [0, 1]")
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if self.reliability_scope not in SCOPES:
            raise ConfigurationError(f"unknown reliability scope {self.reliability_scope!r}")
        if self.class_assignment not in CLASS_MODES:
            raise ConfigurationError(f"unknown class assignment {self.class_assignment!r}")
        # per-run parameters are validated by constructing one SimulationConfig
        self.to_simulation(self.loads[0])

    def to_simulation(self, lambda_total: float) -> simulator.SimulationConfig:
        reliable, unreliable = self.failure_rate_reliable, self.failure_rate_unreliable
        if self.swap_failure_rates:
            reliable, unreliable = unreliable, reliable
        return simulator.SimulationConfig(
            requests=self.requests, lambda_total=lambda_total,
            mean_holding=self.mean_holding,
            failure_rate_reliable=reliable, failure_rate_unreliable=unreliable,
            wavelength_policy=self.wavelength_policy,
            failure_model=self.failure_model,
            repack_threshold=self.repack_threshold, wi_repack=self.wi_repack,
            estimator=self.estimator, kalman_q=self.kalman_q,
            kalman_r=self.kalman_r, scan_interval=self.scan_interval,
            window_length=self.window_length,
            warmup_fraction=self.warmup_fraction,
            traffic_pairs=self.traffic_pairs, mode_override=self.mode_override,
            check_invariants=self.check_invariants)


# -- config file parsing ----------------------------------------------------

_LIST_FIELDS = {"loads": float, "reliability_ratios": float, "algorithms": str}
_BOOL_FIELDS = {"swap_failure_rates", "check_invariants"}
_OPTIONAL_FLOAT_FIELDS = {"scan_interval"}


def _parse_number(raw: str) -> float:
    """Float literal or an a/b fraction (handy for failure rates)."""
    if "/" in raw:
        num, _, den = raw.partition("/")
        return float(num) / float(den)
    return float(raw)


def parse_config(text: str) -> ExperimentConfig:
    field_types = {f.name: f.type for f in fields(ExperimentConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected key = value")
        key, _, rest = line.partition("=")
        key, rest = key.strip(), rest.strip()
        if key not in field_types:
            raise ConfigurationError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"config line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(key, rest)
        except (ValueError, ZeroDivisionError):
            raise ConfigurationError(
                f"config line {lineno}: bad value {rest!r} for {key!r}") from None
    missing = {"topology_path", "loads", "requests"} - values.keys()
    if missing:
        raise ConfigurationError(f"config is missing required keys: {sorted(missing)}")
    return ExperimentConfig(**values)


def _parse_value(key: str, raw: str):
    if key in _LIST_FIELDS:
        caster = _LIST_FIELDS[key]
        items = [item.strip() for item in raw.split(",") if item.strip()]
        if caster is float:
            return tuple(_parse_number(item) for item in items)
        return tuple(items)
    if key in _BOOL_FIELDS:
        if raw.lower() in ("true", "yes", "1"):
            return True
        if raw.lower() in ("false", "no", "0"):
            return False
        raise ValueError(raw)
    if key == "traffic_pairs":
        pairs = []
        for item in raw.split(","):
            item = item.strip()
            if not item:
                continue
            s, sep, d = item.partition(":")
            if not sep or not s or not d:
                raise ValueError(item)
            pairs.append((s, d))
        return tuple(pairs) if pairs else None
    if key in ("requests", "replications", "base_seed", "window_length"):
        return int(raw)
    if key in _OPTIONAL_FLOAT_FIELDS:
        return None if raw.lower() == "none" else _parse_number(raw)
    if key in ("mean_holding", "failure_rate_reliable", "failure_rate_unreliable",
               "repack_threshold", "kalman_q", "kalman_r", "warmup_fraction"):
        return _parse_number(raw)
    if key == "mode_override":
        return None if raw.lower() == "none" else raw
    return raw  # plain string fields


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# -- reliability class assignment -------------------------------------------


def assign_reliability_classes(topology: Topology, ratio: float, seed: int,
                               scope: str = SCOPE_ALL) -> Topology:
    """Mark ceil(ratio * pool size) elements unreliable, sampled uniformly
    with the given seed; everything else becomes reliable."""
    if not 0.0 <= ratio <= 1.0:
        raise ConfigurationError(f"reliability ratio {ratio} outside [0, 1]")
    pool: list[tuple[str, int]] = [("router", r.id) for r in topology.routers]
    if scope == SCOPE_ALL:
        pool += [("link", l.id) for l in topology.links]
    elif scope != SCOPE_ROUTERS:
        raise ConfigurationError(f"unknown reliability scope {scope!r}")
    k = math.ceil(ratio * len(pool))
    chosen = random.Random(seed).sample(pool, k) if k else []
    unreliable_routers = {eid for kind, eid in chosen if kind == "router"}
    unreliable_links = {eid for kind, eid in chosen if kind == "link"}
    return topology.with_reliability_classes(unreliable_routers, unreliable_links)


# -- sweep execution ---------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    algorithm: str
    lambda_T: float
    load_per_wavelength: float
    reliability_ratio: float
    seed: int
    offered: int
    blocked: int
    accepted: int
    reconfig_events: int
    blocking_prob: float
    reconfig_prob: float
    wallclock_s: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]


def derive_seed(base_seed: int, load_index: int, ratio_index: int,
                replication: int) -> int:
    """Run seed for one grid point. The algorithm is deliberately not part
    of the mix: algorithms compared at the same grid point share one random
    stream, which pairs their replications (common random numbers)."""
    return mix(base_seed, load_index, ratio_index, replication)


def run_sweep(config: ExperimentConfig, *, topology: Topology | None = None,
              measure_walltime: bool = False, trace=None) -> SweepResult:
    """Execute every grid point and return rows in deterministic order
    (algorithm-major, then load, ratio, replication)."""
    if topology is None:
        topology = load_topology(config.topology_path)
    seeds = {}
    for li in range(len(config.loads)):
        for ri in range(len(config.reliability_ratios)):
            for rep in range(config.replications):
                seed = derive_seed(config.base_seed, li, ri, rep)
                if seed in seeds:
                    raise ConfigurationError(
                        f"seed collision between grid points {seeds[seed]} "
                        f"and {(li, ri, rep)}")
                seeds[seed] = (li, ri, rep)

    wavelengths = max(l.wavelengths_per_fiber for l in topology.links) if topology.links else 1
    fiber_count = sum(l.fibers for l in topology.links) if topology.links else 1

    rows: list[SweepRow] = []
    for algorithm in config.algorithms:
        for li, lam in enumerate(config.loads):
            sim_config = config.to_simulation(lam)
            for ri, ratio in enumerate(config.reliability_ratios):
                for rep in range(config.replications):
                    seed = derive_seed(config.base_seed, li, ri, rep)
                    if config.class_assignment == CLASSES_FIXED:
                        class_seed = mix(config.base_seed, ri, 0xC1A55)
                    else:
                        class_seed = mix(seed, 0xC1A55)
                    topo = assign_reliability_classes(
                        topology, ratio, class_seed, config.reliability_scope)
                    if trace is not None:
                        trace.write(f"# run algorithm={algorithm} lambda_T={lam!r}"
                                    f" ratio={ratio!r} seed={seed}\n")
                    started = time.perf_counter()
                    metrics = simulator.run(sim_config, topo, algorithm, seed,
                                            trace=trace)
                    wallclock = time.perf_counter() - started if measure_walltime else 0.0
                    rows.append(SweepRow(
                        algorithm=algorithm, lambda_T=lam,
                        load_per_wavelength=simulator.load_per_wavelength(
                            lam, metrics.mean_hops, wavelengths, fiber_count),
                        reliability_ratio=ratio, seed=seed,
                        offered=metrics.offered, blocked=metrics.blocked,
                        accepted=metrics.accepted,
                        reconfig_events=metrics.reconfig_events,
                        blocking_prob=metrics.blocking_probability,
                        reconfig_prob=metrics.reconfiguration_probability,
                        wallclock_s=round(wallclock, 3)))
    return SweepResult(rows=tuple(rows))


# -- CSV I/O -----------------------------------------------------------------


def _format(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_csv(result: SweepResult, fh: io.TextIOBase) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        writer.writerow([_format(getattr(row, col)) for col in CSV_HEADER])


def read_csv(fh: io.TextIOBase) -> SweepResult:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigurationError("empty CSV") from None
    if tuple(header) != CSV_HEADER:
        raise ConfigurationError(f"unexpected CSV header: {header}")
    rows = []
    for record in reader:
        if not record:
            continue
        rows.append(SweepRow(
            algorithm=record[0], lambda_T=float(record[1]),
            load_per_wavelength=float(record[2]),
            reliability_ratio=float(record[3]), seed=int(record[4]),
            offered=int(record[5]), blocked=int(record[6]),
            accepted=int(record[7]), reconfig_events=int(record[8]),
            blocking_prob=float(record[9]), reconfig_prob=float(record[10]),
            wallclock_s=float(record[11])))
    return SweepResult(rows=tuple(rows))


def save_csv(result: SweepResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(result, fh)


def load_csv(path) -> SweepResult:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return read_csv(fh)


# -- summaries ---------------------------------------------------------------


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    lambda_T: float
    reliability_ratio: float
    n: int
    load_per_wavelength: float
    blocking_prob_mean: float
    blocking_prob_se: float | None
    reconfig_prob_mean: float
    reconfig_prob_se: float | None
    mrpr_reconfig_improvement: float | None


def _mean_se(samples: list[float]) -> tuple[float, float | None]:
    mean = statistics.fmean(samples)
    if len(samples) < 2:
        return mean, None
    return mean, statistics.stdev(samples) / math.sqrt(len(samples))


def summarize(result: SweepResult) -> list[SummaryRow]:
    """Per-grid-point replication means and standard errors, plus the
    relative improvement of the cost-based algorithm over each baseline's
    reconfiguration probability."""
    groups: dict[tuple, list[SweepRow]] = {}
    for row in result.rows:
        groups.setdefault((row.algorithm, row.lambda_T, row.reliability_ratio),
                          []).append(row)
    mrpr_means = {
        (lam, ratio): statistics.fmean(r.reconfig_prob for r in rows)
        for (alg, lam, ratio), rows in groups.items() if alg == routing.MRPR}
    summary = []
    for (alg, lam, ratio), rows in groups.items():
        blocking_mean, blocking_se = _mean_se([r.blocking_prob for r in rows])
        reconfig_mean, reconfig_se = _mean_se([r.reconfig_prob for r in rows])
        improvement = None
        if alg != routing.MRPR and (lam, ratio) in mrpr_means and reconfig_mean > 0:
            improvement = (reconfig_mean - mrpr_means[(lam, ratio)]) / reconfig_mean
        summary.append(SummaryRow(
            algorithm=alg, lambda_T=lam, reliability_ratio=ratio, n=len(rows),
            load_per_wavelength=statistics.fmean(r.load_per_wavelength for r in rows),
            blocking_prob_mean=blocking_mean, blocking_prob_se=blocking_se,
            reconfig_prob_mean=reconfig_mean, reconfig_prob_se=reconfig_se,
            mrpr_reconfig_improvement=improvement))
    return summary


def write_summary_csv(summary: list[SummaryRow], fh: io.TextIOBase) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in summary:
        writer.writerow([
            row.algorithm, _format(row.lambda_T), _format(row.reliability_ratio),
            row.n, _format(row.load_per_wavelength),
            _format(row.blocking_prob_mean),
            NA if row.blocking_prob_se is None else _format(row.blocking_prob_se),
            _format(row.reconfig_prob_mean),
            NA if row.reconfig_prob_se is None else _format(row.reconfig_prob_se),
            NA if row.mrpr_reconfig_improvement is None else _format(row.mrpr_reconfig_improvement),
        ])
