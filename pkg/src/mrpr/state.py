"""Mutable per-replication network state: channel occupancy, converter
usage, transient failure flags, and the set of active lightpaths."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvariantViolation
from .topology import MODE_SPN, Topology


@dataclass
class Lightpath:
    """An established connection: per-hop (link id, wavelength) plus the
    wavelength conversions performed along the way."""

    id: int
    source: int
    dest: int
    hops: list[tuple[int, int]]
    conversions: list[tuple[int, int, int]]  # (router, from wavelength, to wavelength)
    departure_time: float
    counted: bool = True


def _routers_on_path(topology: Topology, lp: Lightpath) -> list[int]:
    routers = [lp.source]
    for link_id, _ in lp.hops:
        routers.append(topology.link(link_id).dst)
    return routers


class NetworkState:
    """Occupancy bookkeeping for one simulation replication.

    Wavelength occupancy is a per-link list of busy-channel counts indexed
    by wavelength (0-based internally; wavelength w uses index w-1). A
    channel at wavelength w is free when fewer than ``fibers`` lightpaths
    occupy it. Failure flags are transient: they are raised while a failure
    event is being serviced and cleared before the next event.
    """

    def __init__(self, topology: Topology) -> None:
        self.topology = topology
        self.link_occ: dict[int, list[int]] = {
            l.id: [0] * l.wavelengths_per_fiber for l in topology.links}
        self.converters_in_use: dict[int, int] = {r.id: 0 for r in topology.routers}
        self.failed_links: set[int] = set()
        self.failed_routers: set[int] = set()
        self.active: dict[int, Lightpath] = {}

    # -- queries ---------------------------------------------------------

    def is_channel_free(self, link_id: int, wavelength: int) -> bool:
        link = self.topology.link(link_id)
        return self.link_occ[link_id][wavelength - 1] < link.fibers

    def free_wavelengths(self, link_id: int) -> list[int]:
        link = self.topology.link(link_id)
        occ = self.link_occ[link_id]
        return [w for w in range(1, link.wavelengths_per_fiber + 1)
                if occ[w - 1] < link.fibers]

    def free_channel_count(self, link_id: int) -> int:
        link = self.topology.link(link_id)
        return link.capacity - sum(self.link_occ[link_id])

    def occupied_channel_count(self, link_id: int) -> int:
        return sum(self.link_occ[link_id])

    def converters_free(self, router_id: int) -> int:
        return self.topology.router(router_id).converter_count - self.converters_in_use[router_id]

    def is_link_failed(self, link_id: int) -> bool:
        return link_id in self.failed_links

    def is_router_failed(self, router_id: int) -> bool:
        return router_id in self.failed_routers

    def routers_on_path(self, lp: Lightpath) -> list[int]:
        return _routers_on_path(self.topology, lp)

    # -- mutation --------------------------------------------------------

    def occupy(self, lp: Lightpath) -> None:
        track_converters = self.topology.mode == MODE_SPN
        for link_id, w in lp.hops:
            link = self.topology.link(link_id)
            occ = self.link_occ[link_id]
            if occ[w - 1] >= link.fibers:
                raise InvariantViolation(
                    f"lightpath {lp.id}: channel ({link_id}, {w}) not free")
            occ[w - 1] += 1
        if track_converters:
            for router_id, _, _ in lp.conversions:
                router = self.topology.router(router_id)
                if self.converters_in_use[router_id] >= router.converter_count:
                    raise InvariantViolation(
                        f"lightpath {lp.id}: no converter free at router {router_id}")
                self.converters_in_use[router_id] += 1
        self.active[lp.id] = lp

    def release(self, lp: Lightpath) -> None:
        if lp.id not in self.active:
            raise InvariantViolation(f"lightpath {lp.id} not active")
        for link_id, w in lp.hops:
            occ = self.link_occ[link_id]
            if occ[w - 1] <= 0:
                raise InvariantViolation(
                    f"lightpath {lp.id}: releasing free channel ({link_id}, {w})")
            occ[w - 1] -= 1
        if self.topology.mode == MODE_SPN:
            for router_id, _, _ in lp.conversions:
                if self.converters_in_use[router_id] <= 0:
                    raise InvariantViolation(
                        f"lightpath {lp.id}: releasing unused converter at {router_id}")
                self.converters_in_use[router_id] -= 1
        del self.active[lp.id]

    def check_conservation(self) -> None:
        """Recompute occupancy from the active set and compare; raises on any
        mismatch. Intended for debug runs and tests."""
        expected: dict[int, list[int]] = {
            l.id: [0] * l.wavelengths_per_fiber for l in self.topology.links}
        converters: dict[int, int] = {r.id: 0 for r in self.topology.routers}
        for lp in self.active.values():
            for link_id, w in lp.hops:
                expected[link_id][w - 1] += 1
            for router_id, _, _ in lp.conversions:
                converters[router_id] += 1
        if expected != self.link_occ:
            raise InvariantViolation("channel occupancy does not match active lightpaths")
        if self.topology.mode == MODE_SPN and converters != self.converters_in_use:
            raise InvariantViolation("converter usage does not match active lightpaths")
        for rid, used in self.converters_in_use.items():
            if used > self.topology.router(rid).converter_count:
                raise InvariantViolation(f"router {rid}: converter bank overcommitted")
