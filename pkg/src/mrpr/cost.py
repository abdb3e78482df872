"""Failure probabilities and log-survival edge costs.

Every routing algorithm in this package prices a network element by the
probability that it forces an established lightpath to be reconfigured
before its holding time ends. Costs are -ln(survival probability), so path
costs add and a probability of 1 maps to an infinite (unusable) edge.

All functions here are pure; they are safe to call from any context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf

TCHEBYCHEFF = "tchebycheff"
EXPONENTIAL = "exponential"
FAILURE_MODELS = (TCHEBYCHEFF, EXPONENTIAL)

DEFAULT_REPACK_THRESHOLD = 0.5


@dataclass(frozen=True)
class FailureStats:
    """Mean and variance of an element's failure inter-arrival time."""

    mu_f: float
    var_f: float

    def __post_init__(self) -> None:
        if not self.mu_f > 0:
            raise ValueError("mean failure inter-arrival must be positive")
        if self.var_f < 0:
            raise ValueError("variance must be nonnegative")


@dataclass(frozen=True)
class HoldingStats:
    """Mean and variance of lightpath holding times for a traffic pair."""

    mu_h: float
    var_h: float

    def __post_init__(self) -> None:
        if not self.mu_h > 0:
            raise ValueError("mean holding time must be positive")
        if self.var_h < 0:
            raise ValueError("variance must be nonnegative")


def tchebycheff_failure_probability(fs: FailureStats, hs: HoldingStats,
                                    broken_or_full: bool = False) -> float:
    """Concentration bound on P(element fails before the lightpath departs).

    Returns 1 outright for a broken or fully occupied element, and also when
    the mean failure inter-arrival does not exceed the mean holding time
    (the bound's denominator vanishes there; a failure expected within the
    holding period is maximally unreliable). Otherwise

        min{1, var_f / (2 gap^2) * [1 + 3 var_h / gap^2]},  gap = mu_f - mu_h.
    """
    if broken_or_full:
        return 1.0
    if fs.mu_f <= hs.mu_h:
        return 1.0
    gap_sq = (fs.mu_f - hs.mu_h) ** 2
    bound = fs.var_f / (2.0 * gap_sq) * (1.0 + 3.0 * hs.var_h / gap_sq)
    return min(1.0, bound)


def exact_failure_probability_exponential(mu_f: float, mu_h: float) -> float:
    """P(failure precedes departure) when both processes are exponential.

    For failure inter-arrival mean mu_f and holding mean mu_h the
    race-of-exponentials probability is mu_h / (mu_f + mu_h).
    """
    if mu_f <= 0 or mu_h <= 0:
        raise ValueError("means must be positive")
    if math.isinf(mu_f):
        return 0.0
    return mu_h / (mu_f + mu_h)


def failure_probability(fs: FailureStats, hs: HoldingStats, *,
                        broken_or_full: bool = False,
                        model: str = TCHEBYCHEFF) -> float:
    """Dispatch between the concentration bound and the exponential form."""
    if model == TCHEBYCHEFF:
        return tchebycheff_failure_probability(fs, hs, broken_or_full)
    if model == EXPONENTIAL:
        if broken_or_full:
            return 1.0
        return exact_failure_probability_exponential(fs.mu_f, hs.mu_h)
    raise ValueError(f"unknown failure model {model!r}")


def element_cost(p: float) -> float:
    """-ln(1 - p): the additive cost of surviving one element."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p!r} outside [0, 1]")
    if p == 1.0:
        return INF
    return -math.log1p(-p)


def combined_link_cost(p_link: float, q_router: float) -> float:
    """Cost of a link and its head router together; exactly the sum of the
    element costs."""
    return element_cost(p_link) + element_cost(q_router)


def erlang_b(n: int, rho: float) -> float:
    """Blocking probability of an n-server loss system offered rho Erlangs.

    Standard recursion E(0) = 1, E(k) = rho E(k-1) / (k + rho E(k-1));
    numerically stable for all practical n.
    """
    if n < 0 or int(n) != n:
        raise ValueError("server count must be a nonnegative integer")
    if rho < 0:
        raise ValueError("offered load must be nonnegative")
    b = 1.0
    for k in range(1, int(n) + 1):
        b = rho * b / (k + rho * b)
    return b


def repacking_probability(x: int, x0: int, rho: float) -> float:
    """Probability that a lightpath occupying one of x busy units on a bank
    of x0 is displaced by repacking.

    Computed as E(x, rho) / (x E(x0, rho)) clamped to [0, 1]. The x = x0
    case reduces to exactly 1/x for any load (one of the x occupants is
    displaced). x = 0 means the lightpath uses no unit on this bank, so
    nothing can be repacked. At rho = 0 the ratio is taken in the limit:
    0 for x != x0.
    """
    if x < 0 or x0 < 1:
        raise ValueError("busy count must be >= 0 and bank size >= 1")
    if rho < 0:
        raise ValueError("offered load must be nonnegative")
    if x == 0:
        return 0.0
    if x == x0:
        return 1.0 / x
    if rho == 0.0:
        return 0.0
    ratio = erlang_b(x, rho) / (x * erlang_b(x0, rho))
    return min(1.0, max(0.0, ratio))


def wi_edge_cost(f_link: float, f_router: float, r_repack: float,
                 has_free_channel: bool,
                 repack_threshold: float = DEFAULT_REPACK_THRESHOLD) -> float:
    """Edge cost in the full-conversion router graph:
    -ln(1-F_link) - ln(1-F_router) - ln(1-R); unusable without a free channel
    or when the repacking probability exceeds the threshold."""
    if not has_free_channel:
        return INF
    if r_repack > repack_threshold:
        return INF
    return element_cost(f_link) + element_cost(f_router) + element_cost(r_repack)


def spn_channel_edge_cost(f_link: float, r_repack: float,
                          has_free_channel: bool,
                          repack_threshold: float = DEFAULT_REPACK_THRESHOLD) -> float:
    """Cost of one wavelength channel edge in a share-per-node graph."""
    if not has_free_channel:
        return INF
    if r_repack > repack_threshold:
        return INF
    return element_cost(f_link) + element_cost(r_repack)


def spn_converter_edge_cost(f_router: float, r_repack: float,
                            has_free_converter: bool, node_failed: bool,
                            repack_threshold: float = DEFAULT_REPACK_THRESHOLD) -> float:
    """Cost of a wavelength-conversion edge inside one router."""
    if node_failed or not has_free_converter:
        return INF
    if r_repack > repack_threshold:
        return INF
    return element_cost(f_router) + element_cost(r_repack)


def spn_passthrough_edge_cost(f_router: float, node_failed: bool) -> float:
    """Cost of crossing a router without changing wavelength."""
    if node_failed:
        return INF
    return element_cost(f_router)
