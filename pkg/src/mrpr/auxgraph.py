"""Routing graph construction.

Two graph flavors feed the shortest-path search:

* full-conversion (wi) mode: one node per router, one edge per link, edge
  cost combining the link's and head router's failure probabilities plus a
  repacking term;
* share-per-node (spn) mode: a layered graph with an input and an output
  port node per (router, wavelength), channel edges between routers at a
  fixed wavelength, conversion and passthrough edges inside each router,
  and zero-cost terminal attachments for the requested source/destination.

Construction is a pure function of (topology, state snapshot, stats
snapshot); node and edge orderings are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import cost as costmod
from .errors import InvariantViolation
from .stats import ElementStats
from .state import NetworkState
from .topology import Topology

# aux node kinds
IN_PORT = "in"
OUT_PORT = "out"
SOURCE = "source"
DEST = "dest"

# edge kinds
CHANNEL = "channel"
CONVERSION = "conversion"
PASSTHROUGH = "passthrough"
SOURCE_ATTACH = "source_attach"
DEST_ATTACH = "dest_attach"
LINK_EDGE = "link"

WI_REPACK_ZERO = "zero"
WI_REPACK_ERLANG = "erlang"


@dataclass(frozen=True)
class AuxNode:
    kind: str
    router: int
    wavelength: int | None = None

    def __repr__(self) -> str:
        if self.kind in (SOURCE, DEST):
            return f"{self.kind}({self.router})"
        return f"{self.kind}({self.router},w{self.wavelength})"


@dataclass(frozen=True)
class Edge:
    tail: object
    head: object
    cost: float
    kind: str
    link: int | None = None
    router: int | None = None
    wavelength: int | None = None
    conversion: tuple[int, int] | None = None  # (from wavelength, to wavelength)
    # breaks exact cost ties away from resource-consuming edges (a free
    # conversion must not beat a free passthrough)
    tie_penalty: int = 0


class Digraph:
    """Minimal weighted digraph with stable insertion order."""

    def __init__(self) -> None:
        self.nodes: list = []
        self.edges: list[Edge] = []
        self._index: dict = {}
        self._out: dict = {}

    def add_node(self, node) -> None:
        if node in self._index:
            return
        self._index[node] = len(self.nodes)
        self.nodes.append(node)
        self._out[node] = []

    def add_edge(self, edge: Edge) -> None:
        if edge.tail not in self._index or edge.head not in self._index:
            raise ValueError("edge endpoints must be added before the edge")
        self.edges.append(edge)
        self._out[edge.tail].append(edge)

    def out(self, node) -> list[Edge]:
        return self._out[node]

    def index(self, node) -> int:
        return self._index[node]

    def __contains__(self, node) -> bool:
        return node in self._index


class AuxGraph(Digraph):
    """Layered share-per-node graph for one (source, dest) request."""

    def __init__(self, request: tuple[int, int], wavelengths: int) -> None:
        super().__init__()
        self.request = request
        self.wavelengths = wavelengths
        self.source_node = AuxNode(SOURCE, request[0])
        self.dest_node = AuxNode(DEST, request[1])


@dataclass(frozen=True)
class Extracted:
    hops: list[tuple[int, int]]
    conversions: list[tuple[int, int, int]]


def live_repack_probability(busy_after: int, capacity: int, rho: float) -> float:
    """Repacking probability charged to a candidate lightpath.

    Repacking only ever displaces lightpaths from a saturated bank, so a
    candidate that leaves headroom is not at risk; one that takes the last
    unit is displaced with probability 1/capacity.
    """
    if busy_after < capacity:
        return 0.0
    return costmod.repacking_probability(capacity, capacity, rho)


def _link_repack(topology: Topology, state: NetworkState, stats: ElementStats,
                 link_id: int, mean_holding: float, mode: str) -> float:
    if mode == WI_REPACK_ZERO:
        return 0.0
    rho = stats.offered_load(stats.link_occupancy[link_id], mean_holding)
    busy_after = state.occupied_channel_count(link_id) + 1
    return live_repack_probability(busy_after, topology.link(link_id).capacity, rho)


def build_wi_graph(topology: Topology, state: NetworkState, stats: ElementStats,
                   s: int, d: int, *,
                   failure_model: str = costmod.TCHEBYCHEFF,
                   repack_threshold: float = costmod.DEFAULT_REPACK_THRESHOLD,
                   wi_repack: str = WI_REPACK_ZERO,
                   mean_holding: float = 1.0) -> Digraph:
    """Router-level graph for full-conversion routing.

    Every link contributes one edge; links with no free channel or failed
    endpoints carry infinite cost rather than being dropped, so the node set
    never varies with occupancy.
    """
    topology.router(s), topology.router(d)
    hs = costmod.HoldingStats(stats.holding(s, d).mean,
                              stats.holding(s, d).variance)
    graph = Digraph()
    for router in topology.routers:
        graph.add_node(router.id)
    for link in topology.links:
        free = state.free_channel_count(link.id) > 0
        fs_link = costmod.FailureStats(stats.link_failure[link.id].mean,
                                       stats.link_failure[link.id].variance)
        f_link = costmod.failure_probability(
            fs_link, hs, broken_or_full=state.is_link_failed(link.id) or not free,
            model=failure_model)
        fs_router = costmod.FailureStats(stats.router_failure[link.dst].mean,
                                         stats.router_failure[link.dst].variance)
        f_router = costmod.failure_probability(
            fs_router, hs, broken_or_full=state.is_router_failed(link.dst),
            model=failure_model)
        r_repack = _link_repack(topology, state, stats, link.id, mean_holding, wi_repack)
        edge_cost = costmod.wi_edge_cost(f_link, f_router, r_repack, free,
                                         repack_threshold)
        graph.add_edge(Edge(tail=link.src, head=link.dst, cost=edge_cost,
                            kind=LINK_EDGE, link=link.id))
    return graph


def build_spn_graph(topology: Topology, state: NetworkState, stats: ElementStats,
                    s: int, d: int, *,
                    failure_model: str = costmod.TCHEBYCHEFF,
                    repack_threshold: float = costmod.DEFAULT_REPACK_THRESHOLD,
                    mean_holding: float = 1.0) -> AuxGraph:
    """Layered graph for share-per-node routing of one request.

    For N routers and W wavelengths the graph has 2NW + 2 nodes, W
    passthrough plus W(W-1) conversion edges per router, W channel edges per
    link, and W attachments at each terminal.
    """
    topology.router(s), topology.router(d)
    wavelengths = topology.uniform_wavelength_count()
    hs = costmod.HoldingStats(stats.holding(s, d).mean,
                              stats.holding(s, d).variance)
    graph = AuxGraph(request=(s, d), wavelengths=wavelengths)
    graph.add_node(graph.source_node)
    graph.add_node(graph.dest_node)
    for router in topology.routers:
        for w in range(1, wavelengths + 1):
            graph.add_node(AuxNode(IN_PORT, router.id, w))
            graph.add_node(AuxNode(OUT_PORT, router.id, w))

    for w in range(1, wavelengths + 1):
        graph.add_edge(Edge(tail=graph.source_node, head=AuxNode(IN_PORT, s, w),
                            cost=0.0, kind=SOURCE_ATTACH, wavelength=w))

    for router in topology.routers:
        failed = state.is_router_failed(router.id)
        fs = costmod.FailureStats(stats.router_failure[router.id].mean,
                                  stats.router_failure[router.id].variance)
        f_router = costmod.failure_probability(fs, hs, model=failure_model)
        has_converter = state.converters_free(router.id) > 0
        if router.converter_count > 0:
            window = stats.converter_occupancy.get(router.id)
            rho = stats.offered_load(window, mean_holding) if window else 0.0
            r_conv = live_repack_probability(
                state.converters_in_use[router.id] + 1, router.converter_count, rho)
        else:
            r_conv = 0.0
        for v in range(1, wavelengths + 1):
            for w in range(1, wavelengths + 1):
                tail = AuxNode(IN_PORT, router.id, v)
                head = AuxNode(OUT_PORT, router.id, w)
                if v == w:
                    c = costmod.spn_passthrough_edge_cost(f_router, failed)
                    graph.add_edge(Edge(tail=tail, head=head, cost=c,
                                        kind=PASSTHROUGH, router=router.id,
                                        wavelength=w))
                else:
                    c = costmod.spn_converter_edge_cost(
                        f_router, r_conv, has_converter, failed, repack_threshold)
                    graph.add_edge(Edge(tail=tail, head=head, cost=c,
                                        kind=CONVERSION, router=router.id,
                                        conversion=(v, w), tie_penalty=1))

    for link in topology.links:
        fs = costmod.FailureStats(stats.link_failure[link.id].mean,
                                  stats.link_failure[link.id].variance)
        f_link = costmod.failure_probability(
            fs, hs, broken_or_full=state.is_link_failed(link.id),
            model=failure_model)
        rho = stats.offered_load(stats.link_occupancy[link.id], mean_holding)
        r_link = live_repack_probability(
            state.occupied_channel_count(link.id) + 1, link.capacity, rho)
        for w in range(1, wavelengths + 1):
            free = (state.is_channel_free(link.id, w)
                    and not state.is_link_failed(link.id))
            c = costmod.spn_channel_edge_cost(f_link, r_link, free, repack_threshold)
            graph.add_edge(Edge(tail=AuxNode(OUT_PORT, link.src, w),
                                head=AuxNode(IN_PORT, link.dst, w),
                                cost=c, kind=CHANNEL, link=link.id, wavelength=w))

    for w in range(1, wavelengths + 1):
        graph.add_edge(Edge(tail=AuxNode(OUT_PORT, d, w), head=graph.dest_node,
                            cost=0.0, kind=DEST_ATTACH, wavelength=w))
    return graph


def extract_lightpath(graph: AuxGraph, pred: dict) -> Extracted:
    """Invert the layered construction: walk the predecessor map from the
    destination terminal back to the source terminal and report physical
    hops plus conversions.

    Raises ValueError when the predecessor map does not reach the
    destination, and InvariantViolation when the encoded path is not
    physically consistent (broken wavelength continuity, repeated router).
    """
    edges: list[Edge] = []
    node = graph.dest_node
    while node != graph.source_node:
        edge = pred.get(node)
        if edge is None:
            raise ValueError("predecessor map does not connect source to destination")
        if math.isinf(edge.cost):
            raise ValueError("predecessor map traverses an unusable edge")
        edges.append(edge)
        node = edge.tail
        if len(edges) > len(graph.nodes):
            raise InvariantViolation("predecessor map contains a cycle")
    edges.reverse()

    hops: list[tuple[int, int]] = []
    conversions: list[tuple[int, int, int]] = []
    current_w: int | None = None
    for edge in edges:
        if edge.kind == CHANNEL:
            if current_w is not None and edge.wavelength != current_w:
                raise InvariantViolation("wavelength continuity broken across a hop")
            hops.append((edge.link, edge.wavelength))
            current_w = edge.wavelength
        elif edge.kind == CONVERSION:
            v, w = edge.conversion
            if current_w is not None and v != current_w:
                raise InvariantViolation("conversion does not start at current wavelength")
            conversions.append((edge.router, v, w))
            current_w = w
        elif edge.kind == PASSTHROUGH:
            if current_w is not None and edge.wavelength != current_w:
                raise InvariantViolation("passthrough changes wavelength")
            current_w = edge.wavelength
        elif edge.kind in (SOURCE_ATTACH, DEST_ATTACH):
            continue
    routers_seen = [graph.request[0]]
    routers_seen.extend(e.head.router for e in edges if e.kind == CHANNEL)
    if len(set(routers_seen)) != len(routers_seen):
        raise InvariantViolation("extracted path revisits a router")
    return Extracted(hops=hops, conversions=conversions)


def to_dot(graph: Digraph) -> str:
    """Render the graph in DOT format for visual inspection; infinite-cost
    edges are drawn dashed."""
    lines = ["digraph routing {"]
    for node in graph.nodes:
        lines.append(f'  "{node}";')
    for e in graph.edges:
        style = ' style=dashed label="inf"' if math.isinf(e.cost) else f' label="{e.cost:.4g}"'
        lines.append(f'  "{e.tail}" -> "{e.head}" [{style.strip()}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
