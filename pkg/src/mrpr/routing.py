"""Path selection: Bellman-Ford search, minimum-reconfiguration-probability
routing, and the adaptive shortest-hop (aur) and least-loaded (llr)
baselines, plus wavelength assignment policies.

Tie-breaking policy: the cost-based search is fully deterministic, ordering
candidates by (cost, hop count, lexicographic node sequence). The baselines
break ties among equally good paths with the replication's seeded random
source, so identical (state, stats, seed) always yield identical decisions.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

from . import auxgraph as ag
from . import cost as costmod
from .errors import InvariantViolation
from .stats import ElementStats
from .state import NetworkState
from .topology import MODE_SPN, MODE_WI, Topology

ACCEPTED = "accepted"
BLOCKED = "blocked"

MRPR = "mrpr"
AUR = "aur"
LLR = "llr"
ALGORITHMS = (MRPR, AUR, LLR)

FIRST_FIT = "first_fit"
RANDOM_FIT = "random"
POLICIES = (FIRST_FIT, RANDOM_FIT)

# llr enumerates every simple path up to this router count, then falls back
# to a bounded candidate set
EXHAUSTIVE_ROUTER_LIMIT = 8
LLR_CANDIDATES = 5
MAX_TIE_PATHS = 64


@dataclass(frozen=True)
class RouteDecision:
    outcome: str
    hops: tuple[tuple[int, int], ...] = ()
    conversions: tuple[tuple[int, int, int], ...] = ()
    total_cost: float = math.inf
    algorithm: str = MRPR

    @property
    def accepted(self) -> bool:
        return self.outcome == ACCEPTED


_BLOCKED = {alg: RouteDecision(outcome=BLOCKED, algorithm=alg) for alg in ALGORITHMS}


def blocked_decision(algorithm: str) -> RouteDecision:
    return _BLOCKED[algorithm]


def bellman_ford(graph: ag.Digraph, src, node_priority=None) -> tuple[dict, dict]:
    """Exact shortest paths from ``src`` by edge relaxation.

    Returns (distance map, predecessor map); unreachable nodes have
    infinite distance and no predecessor. Ties are resolved toward fewer
    hops, then the smallest accumulated edge tie-penalty (conversion edges
    carry one), then the lexicographically smallest node-priority sequence,
    which also guarantees the reconstructed paths are simple.
    ``node_priority`` maps node index to comparison rank; the default
    identity gives a fully deterministic order, a shuffled permutation turns
    exact-tie resolution into a seeded random choice without ever affecting
    costs, hop counts, or resource-saving preferences. Negative edge costs
    violate the cost model and abort the search.
    """
    if src not in graph:
        raise ValueError(f"unknown source node {src!r}")
    for e in graph.edges:
        if e.cost < 0:
            raise InvariantViolation(f"negative edge cost {e.cost} on {e}")
    if node_priority is None:
        def node_priority(index: int) -> int:
            return index
    dist = {node: math.inf for node in graph.nodes}
    hops = {node: 0 for node in graph.nodes}
    pen = {node: 0 for node in graph.nodes}
    seq: dict = {node: () for node in graph.nodes}
    pred: dict = {node: None for node in graph.nodes}
    dist[src] = 0.0
    seq[src] = (node_priority(graph.index(src)),)
    for _ in range(max(0, len(graph.nodes) - 1)):
        improved = False
        for e in graph.edges:
            if math.isinf(e.cost) or math.isinf(dist[e.tail]):
                continue
            cand = dist[e.tail] + e.cost
            if cand < dist[e.head]:
                better = True
            elif cand == dist[e.head]:
                cand_key = (hops[e.tail] + 1, pen[e.tail] + e.tie_penalty,
                            seq[e.tail] + (node_priority(graph.index(e.head)),))
                better = cand_key < (hops[e.head], pen[e.head], seq[e.head])
            else:
                better = False
            if better:
                dist[e.head] = cand
                hops[e.head] = hops[e.tail] + 1
                pen[e.head] = pen[e.tail] + e.tie_penalty
                seq[e.head] = seq[e.tail] + (node_priority(graph.index(e.head)),)
                pred[e.head] = e
                improved = True
        if not improved:
            break
    return dist, pred


def _shuffled_priority(graph: ag.Digraph, rng: random.Random | None):
    """Per-decision random node ranks; None (identity order) without a rng."""
    if rng is None:
        return None
    ranks = list(range(len(graph.nodes)))
    rng.shuffle(ranks)
    return ranks.__getitem__


def _walk_pred(graph: ag.Digraph, pred: dict, src, dst) -> list[ag.Edge]:
    edges: list[ag.Edge] = []
    node = dst
    while node != src:
        edge = pred.get(node)
        if edge is None:
            raise ValueError("no path recorded to destination")
        edges.append(edge)
        node = edge.tail
        if len(edges) > len(graph.nodes):
            raise InvariantViolation("predecessor walk does not terminate")
    edges.reverse()
    return edges


def assign_wavelength(link_ids, state: NetworkState, policy: str = FIRST_FIT,
                      rng: random.Random | None = None) -> int | None:
    """One wavelength free on every listed link, or None when no common
    wavelength exists. ``first_fit`` picks the smallest index; ``random``
    picks uniformly with the supplied source."""
    if policy not in POLICIES:
        raise ValueError(f"unknown wavelength policy {policy!r}")
    free: set[int] | None = None
    for link_id in link_ids:
        candidates = set(state.free_wavelengths(link_id))
        free = candidates if free is None else free & candidates
        if not free:
            return None
    if not free:
        return None
    if policy == FIRST_FIT:
        return min(free)
    if rng is None:
        raise ValueError("random wavelength policy needs a random source")
    return rng.choice(sorted(free))


def _wi_decision(topology: Topology, state: NetworkState, graph: ag.Digraph,
                 s: int, d: int, algorithm: str, policy: str,
                 rng: random.Random | None) -> RouteDecision:
    dist, pred = bellman_ford(graph, s, _shuffled_priority(graph, rng))
    if math.isinf(dist[d]):
        return blocked_decision(algorithm)
    edges = _walk_pred(graph, pred, s, d)
    return _assign_per_hop(topology, state, [e.link for e in edges], s, d,
                           algorithm, policy, rng, total_cost=dist[d])


def _assign_per_hop(topology: Topology, state: NetworkState, link_ids: list[int],
                    s: int, d: int, algorithm: str, policy: str,
                    rng: random.Random | None, total_cost: float) -> RouteDecision:
    """Full-conversion assignment: each hop picks its wavelength
    independently; wavelength changes between hops are recorded as
    conversions at the intermediate router."""
    hops: list[tuple[int, int]] = []
    conversions: list[tuple[int, int, int]] = []
    prev_w: int | None = None
    for link_id in link_ids:
        w = assign_wavelength([link_id], state, policy, rng)
        if w is None:
            return blocked_decision(algorithm)
        if prev_w is not None and w != prev_w:
            conversions.append((topology.link(link_id).src, prev_w, w))
        hops.append((link_id, w))
        prev_w = w
    return RouteDecision(outcome=ACCEPTED, hops=tuple(hops),
                         conversions=tuple(conversions),
                         total_cost=total_cost, algorithm=algorithm)


def route_mrpr(topology: Topology, state: NetworkState, stats: ElementStats,
               s: int, d: int, *, policy: str = FIRST_FIT,
               rng: random.Random | None = None,
               failure_model: str = costmod.TCHEBYCHEFF,
               repack_threshold: float = costmod.DEFAULT_REPACK_THRESHOLD,
               wi_repack: str = ag.WI_REPACK_ZERO,
               mean_holding: float = 1.0) -> RouteDecision:
    """Minimum predicted-reconfiguration-probability route for one request."""
    _check_request(topology, s, d)
    if state.is_router_failed(s) or state.is_router_failed(d):
        return blocked_decision(MRPR)
    if topology.mode == MODE_WI:
        graph = ag.build_wi_graph(
            topology, state, stats, s, d, failure_model=failure_model,
            repack_threshold=repack_threshold, wi_repack=wi_repack,
            mean_holding=mean_holding)
        return _wi_decision(topology, state, graph, s, d, MRPR, policy, rng)
    graph = ag.build_spn_graph(
        topology, state, stats, s, d, failure_model=failure_model,
        repack_threshold=repack_threshold, mean_holding=mean_holding)
    dist, pred = bellman_ford(graph, graph.source_node,
                              _shuffled_priority(graph, rng))
    if math.isinf(dist[graph.dest_node]):
        return blocked_decision(MRPR)
    extracted = ag.extract_lightpath(graph, pred)
    return RouteDecision(outcome=ACCEPTED, hops=tuple(extracted.hops),
                         conversions=tuple(extracted.conversions),
                         total_cost=dist[graph.dest_node], algorithm=MRPR)


def _feasible_adjacency(topology: Topology, state: NetworkState) -> dict[int, list]:
    """Out-links usable right now: at least one free channel, neither the
    link nor its endpoints flagged failed."""
    adj: dict[int, list] = {r.id: [] for r in topology.routers}
    for link in topology.links:
        if state.is_link_failed(link.id):
            continue
        if state.is_router_failed(link.src) or state.is_router_failed(link.dst):
            continue
        if state.free_channel_count(link.id) <= 0:
            continue
        adj[link.src].append(link)
    return adj


def _min_hop_paths(adj: dict[int, list], s: int, d: int,
                   limit: int = MAX_TIE_PATHS) -> list[list]:
    """All minimum-hop link paths from s to d over the adjacency, up to
    ``limit`` of them, in deterministic (link-id lexicographic) order."""
    dist = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for u in frontier:
            for link in adj[u]:
                if link.dst not in dist:
                    dist[link.dst] = dist[u] + 1
                    nxt.append(link.dst)
        frontier = nxt
    if d not in dist:
        return []
    paths: list[list] = []

    def grow(node: int, acc: list) -> None:
        if len(paths) >= limit:
            return
        if node == d:
            paths.append(list(acc))
            return
        for link in adj[node]:
            if dist.get(link.dst) == dist[node] + 1 and dist[d] - dist[node] > 0:
                acc.append(link)
                grow(link.dst, acc)
                acc.pop()

    grow(s, [])
    return paths


def route_aur(topology: Topology, state: NetworkState, s: int, d: int, *,
              policy: str = FIRST_FIT,
              rng: random.Random | None = None) -> RouteDecision:
    """Adaptive unconstrained routing: minimum-hop path over the currently
    feasible subgraph, no predefined route set. Ties among minimum-hop paths
    are broken by the seeded random source (first path when none given)."""
    _check_request(topology, s, d)
    if state.is_router_failed(s) or state.is_router_failed(d):
        return blocked_decision(AUR)
    adj = _feasible_adjacency(topology, state)
    paths = _min_hop_paths(adj, s, d)
    if not paths:
        return blocked_decision(AUR)
    chosen = paths[0] if rng is None or len(paths) == 1 else paths[rng.randrange(len(paths))]
    return _finish_baseline(topology, state, chosen, s, d, AUR, policy, rng,
                            total_cost=float(len(chosen)))


def route_llr(topology: Topology, state: NetworkState, s: int, d: int, *,
              policy: str = FIRST_FIT,
              rng: random.Random | None = None) -> RouteDecision:
    """Least-loaded routing: among candidate simple paths, pick the one
    maximizing the bottleneck free-channel count; ties fall to fewer hops,
    then to the seeded random source."""
    _check_request(topology, s, d)
    if state.is_router_failed(s) or state.is_router_failed(d):
        return blocked_decision(LLR)
    candidates = _candidate_paths(topology, s, d)
    best: list[tuple[int, ...]] = []
    best_key: tuple[int, int] | None = None
    for path in candidates:
        if any(state.is_link_failed(lid) for lid in path):
            continue
        if any(state.is_router_failed(topology.link(lid).dst) for lid in path):
            continue
        bottleneck = min(state.free_channel_count(lid) for lid in path)
        if bottleneck <= 0:
            continue
        key = (-bottleneck, len(path))
        if best_key is None or key < best_key:
            best_key = key
            best = [path]
        elif key == best_key:
            best.append(path)
    if not best:
        return blocked_decision(LLR)
    chosen = best[0] if rng is None or len(best) == 1 else best[rng.randrange(len(best))]
    return _finish_baseline(topology, state,
                            [topology.link(lid) for lid in chosen], s, d, LLR,
                            policy, rng, total_cost=float(len(chosen)))


def _finish_baseline(topology: Topology, state: NetworkState, links: list,
                     s: int, d: int, algorithm: str, policy: str,
                     rng: random.Random | None, total_cost: float) -> RouteDecision:
    link_ids = [l.id for l in links]
    if topology.mode == MODE_SPN:
        # The baselines do not use converters: one wavelength must be free
        # along the whole path.
        w = assign_wavelength(link_ids, state, policy, rng)
        if w is None:
            return blocked_decision(algorithm)
        return RouteDecision(outcome=ACCEPTED,
                             hops=tuple((lid, w) for lid in link_ids),
                             conversions=(), total_cost=total_cost,
                             algorithm=algorithm)
    return _assign_per_hop(topology, state, link_ids, s, d, algorithm, policy,
                           rng, total_cost=total_cost)


def _check_request(topology: Topology, s: int, d: int) -> None:
    topology.router(s), topology.router(d)
    if s == d:
        raise ValueError("source and destination must differ")


# -- structural path enumeration (occupancy independent, memoized) ---------


@lru_cache(maxsize=4096)
def _simple_paths_cached(signature: tuple, s: int, d: int,
                         exhaustive: bool) -> tuple[tuple[int, ...], ...]:
    adj: dict[int, list[tuple[int, int]]] = {}
    routers = set()
    for link_id, src, dst in signature:
        adj.setdefault(src, []).append((link_id, dst))
        routers.add(src)
        routers.add(dst)
    for out in adj.values():
        out.sort()

    if exhaustive:
        hop_bound = len(routers) - 1
        path_cap = None
    else:
        # bounded candidate generation: stay close to the minimum hop count
        dist = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for _, v in adj.get(u, []):
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if d not in dist:
            return ()
        hop_bound = min(len(routers) - 1, dist[d] + 2)
        path_cap = 500

    paths: list[tuple[int, ...]] = []

    def dfs(node: int, visited: set, acc: list) -> None:
        if path_cap is not None and len(paths) >= path_cap:
            return
        if node == d:
            paths.append(tuple(acc))
            return
        if len(acc) >= hop_bound:
            return
        for link_id, nxt in adj.get(node, []):
            if nxt in visited:
                continue
            visited.add(nxt)
            acc.append(link_id)
            dfs(nxt, visited, acc)
            acc.pop()
            visited.remove(nxt)

    dfs(s, {s}, [])
    paths.sort(key=lambda p: (len(p), p))
    if not exhaustive:
        paths = paths[:LLR_CANDIDATES]
    return tuple(paths)


def _candidate_paths(topology: Topology, s: int, d: int) -> tuple[tuple[int, ...], ...]:
    signature = tuple((l.id, l.src, l.dst) for l in topology.links)
    exhaustive = len(topology.routers) <= EXHAUSTIVE_ROUTER_LIMIT
    return _simple_paths_cached(signature, s, d, exhaustive)
