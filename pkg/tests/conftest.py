import math
from pathlib import Path

import pytest

from mrpr.stats import ElementStats, MeanVarEstimator
from mrpr.state import NetworkState
from mrpr.topology import Link, Router, Topology, load_topology

REPO_ROOT = Path(__file__).resolve().parent.parent
TOPOLOGY_DIR = REPO_ROOT / "topologies"


@pytest.fixture(scope="session")
def example6() -> Topology:
    return load_topology(TOPOLOGY_DIR / "example6.topo")


@pytest.fixture(scope="session")
def example6_text() -> str:
    return (TOPOLOGY_DIR / "example6.topo").read_text()


def make_topology(links: list[tuple[str, str]], *, wavelengths: int = 3,
                  fibers: int = 1, converters: int = 2, mode: str = "wi",
                  labels: list[str] | None = None) -> Topology:
    """Small-topology builder: routers inferred from link labels."""
    if labels is None:
        labels = sorted({lab for pair in links for lab in pair})
    routers = tuple(Router(id=i, label=lab, converter_count=converters)
                    for i, lab in enumerate(labels))
    index = {lab: i for i, lab in enumerate(labels)}
    link_objs = tuple(
        Link(id=i, src=index[a], dst=index[b], fibers=fibers,
             wavelengths_per_fiber=wavelengths)
        for i, (a, b) in enumerate(links))
    return Topology(routers=routers, links=link_objs, mode=mode)


def make_stats(topology: Topology, *,
               failure_prior: tuple[float, float] = (math.inf, 0.0),
               holding_prior: tuple[float, float] = (1.0, 0.0),
               scan_interval: float = 0.1,
               window_length: int = 100) -> ElementStats:
    """Stats database where every element shares one failure prior."""
    return ElementStats.for_topology(
        topology,
        make_estimator=MeanVarEstimator,
        failure_prior={"reliable": failure_prior, "unreliable": failure_prior},
        holding_prior=holding_prior,
        arrival_prior=(1.0, 0.0),
        scan_interval=scan_interval,
        window_length=window_length)


def fresh_state(topology: Topology) -> NetworkState:
    return NetworkState(topology)


def bfs_hop_distance(topology: Topology, s: int, d: int) -> float:
    """Independent minimum-hop oracle over the full link set."""
    dist = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for u in frontier:
            for link in topology.out_links(u):
                if link.dst not in dist:
                    dist[link.dst] = dist[u] + 1
                    nxt.append(link.dst)
        frontier = nxt
    return dist.get(d, math.inf)
