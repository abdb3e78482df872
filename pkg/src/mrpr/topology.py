"""Network model: routers, directed links, and the topology file format.

The file format is line oriented and whitespace separated; ``#`` starts a
comment that runs to end of line. Recognized directives:

    mode <wi|spn>
    router <label> [converters=<int>] [class=<reliable|unreliable>]
    link <from-label> <to-label> [fibers=<int>] [wavelengths=<int>]
         [class=<reliable|unreliable>]

Labels are case sensitive. Defaults: ``converters=0``, ``fibers=1``,
``wavelengths=1``, ``class=reliable``, ``mode wi``. Links are directed; a
bidirectional fiber pair is written as two link lines. Wavelength indices
are 1-based throughout the package: wavelength w on a link with W
wavelengths per fiber satisfies 1 <= w <= W.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import TopologyError

RELIABLE = "reliable"
UNRELIABLE = "unreliable"
RELIABILITY_CLASSES = (RELIABLE, UNRELIABLE)

MODE_WI = "wi"
MODE_SPN = "spn"
MODES = (MODE_WI, MODE_SPN)


@dataclass(frozen=True)
class Router:
    """A wavelength router; ``converter_count`` is the shared converter bank
    size used in spn mode (ignored in wi mode, where conversion is unlimited).
    """

    id: int
    label: str
    converter_count: int = 0
    reliability_class: str = RELIABLE


@dataclass(frozen=True)
class Link:
    """A unidirectional fiber link from router ``src`` to router ``dst``."""

    id: int
    src: int
    dst: int
    fibers: int = 1
    wavelengths_per_fiber: int = 1
    reliability_class: str = RELIABLE

    @property
    def capacity(self) -> int:
        """Total channel count: fibers x wavelengths per fiber."""
        return self.fibers * self.wavelengths_per_fiber


@dataclass(frozen=True)
class Topology:
    """Immutable network: validated at construction, safe to share read-only."""

    routers: tuple[Router, ...]
    links: tuple[Link, ...]
    mode: str = MODE_WI

    def __post_init__(self) -> None:
        self._validate()
        by_id = {r.id: r for r in self.routers}
        by_label = {r.label: r.id for r in self.routers}
        link_by_id = {l.id: l for l in self.links}
        out: dict[int, list[Link]] = {r.id: [] for r in self.routers}
        for link in self.links:
            out[link.src].append(link)
        for rid in out:
            out[rid].sort(key=lambda l: l.id)
        object.__setattr__(self, "_router_by_id", by_id)
        object.__setattr__(self, "_id_by_label", by_label)
        object.__setattr__(self, "_link_by_id", link_by_id)
        object.__setattr__(self, "_out", {rid: tuple(ls) for rid, ls in out.items()})

    def _validate(self) -> None:
        if self.mode not in MODES:
            raise TopologyError(f"unknown mode {self.mode!r}")
        seen_ids: set[int] = set()
        seen_labels: set[str] = set()
        for r in self.routers:
            if r.id in seen_ids:
                raise TopologyError(f"duplicate router id {r.id}")
            if r.label in seen_labels:
                raise TopologyError(f"duplicate router label {r.label!r}")
            if r.converter_count < 0:
                raise TopologyError(f"router {r.label!r}: negative converter count")
            if r.reliability_class not in RELIABILITY_CLASSES:
                raise TopologyError(f"router {r.label!r}: bad class {r.reliability_class!r}")
            seen_ids.add(r.id)
            seen_labels.add(r.label)
        link_ids: set[int] = set()
        for l in self.links:
            if l.id in link_ids:
                raise TopologyError(f"duplicate link id {l.id}")
            link_ids.add(l.id)
            if l.src not in seen_ids or l.dst not in seen_ids:
                raise TopologyError(f"link {l.id}: endpoint references unknown router")
            if l.src == l.dst:
                raise TopologyError(f"link {l.id}: self loop")
            if l.wavelengths_per_fiber <= 0:
                raise TopologyError(f"link {l.id}: wavelengths must be positive")
            if l.fibers <= 0:
                raise TopologyError(f"link {l.id}: fibers must be positive")
            if l.reliability_class not in RELIABILITY_CLASSES:
                raise TopologyError(f"link {l.id}: bad class {l.reliability_class!r}")

    # -- lookups ---------------------------------------------------------

    def router(self, rid: int) -> Router:
        try:
            return self._router_by_id[rid]
        except KeyError:
            raise ValueError(f"unknown router id {rid}") from None

    def link(self, lid: int) -> Link:
        try:
            return self._link_by_id[lid]
        except KeyError:
            raise ValueError(f"unknown link id {lid}") from None

    def router_id(self, label: str) -> int:
        try:
            return self._id_by_label[label]
        except KeyError:
            raise ValueError(f"unknown router label {label!r}") from None

    def label(self, rid: int) -> str:
        return self.router(rid).label

    def out_links(self, rid: int) -> tuple[Link, ...]:
        if rid not in self._out:
            raise ValueError(f"unknown router id {rid}")
        return self._out[rid]

    def uniform_wavelength_count(self) -> int:
        """The common W of all links; raises if links disagree (spn graphs
        require a uniform wavelength plan)."""
        counts = {l.wavelengths_per_fiber for l in self.links}
        if len(counts) != 1:
            raise TopologyError(f"links disagree on wavelength count: {sorted(counts)}")
        return counts.pop()

    def with_reliability_classes(self, unreliable_routers: set[int],
                                 unreliable_links: set[int]) -> "Topology":
        """A copy with reliability classes reassigned; everything not named
        becomes reliable."""
        routers = tuple(
            replace(r, reliability_class=UNRELIABLE if r.id in unreliable_routers else RELIABLE)
            for r in self.routers
        )
        links = tuple(
            replace(l, reliability_class=UNRELIABLE if l.id in unreliable_links else RELIABLE)
            for l in self.links
        )
        return Topology(routers=routers, links=links, mode=self.mode)


def neighbors(topology: Topology, rid: int) -> list[tuple[int, int]]:
    """All out-links of a router as (link id, head router id), sorted by link id."""
    return [(l.id, l.dst) for l in topology.out_links(rid)]


# -- file format -----------------------------------------------------------


def _parse_kv(tokens: list[str], allowed: dict[str, type], lineno: int) -> dict:
    values: dict = {}
    for tok in tokens:
        if "=" not in tok:
            raise TopologyError(f"line {lineno}: expected key=value, got {tok!r}")
        key, _, raw = tok.partition("=")
        if key not in allowed:
            raise TopologyError(f"line {lineno}: unknown attribute {key!r}")
        if key in values:
            raise TopologyError(f"line {lineno}: duplicate attribute {key!r}")
        caster = allowed[key]
        try:
            values[key] = caster(raw)
        except ValueError:
            raise TopologyError(f"line {lineno}: bad value for {key!r}: {raw!r}") from None
    return values


def parse_topology(text: str) -> Topology:
    """Parse the file format described in the module docstring.

    Raises TopologyError with a line number on syntax errors, dangling
    endpoint references, duplicate labels, and nonpositive capacities.
    """
    routers: list[Router] = []
    labels: dict[str, int] = {}
    raw_links: list[tuple[int, str, str, dict]] = []
    mode = MODE_WI
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive = tokens[0]
        if directive == "mode":
            if len(tokens) != 2:
                raise TopologyError(f"line {lineno}: mode takes one argument")
            if tokens[1] not in MODES:
                raise TopologyError(f"line {lineno}: unknown mode {tokens[1]!r}")
            mode = tokens[1]
        elif directive == "router":
            if len(tokens) < 2:
                raise TopologyError(f"line {lineno}: router needs a label")
            label = tokens[1]
            if label in labels:
                raise TopologyError(f"line {lineno}: duplicate router {label!r}")
            attrs = _parse_kv(tokens[2:], {"converters": int, "class": str}, lineno)
            rid = len(routers)
            routers.append(Router(
                id=rid,
                label=label,
                converter_count=attrs.get("converters", 0),
                reliability_class=attrs.get("class", RELIABLE),
            ))
            labels[label] = rid
        elif directive == "link":
            if len(tokens) < 3:
                raise TopologyError(f"line {lineno}: link needs two endpoint labels")
            attrs = _parse_kv(
                tokens[3:], {"fibers": int, "wavelengths": int, "class": str}, lineno)
            raw_links.append((lineno, tokens[1], tokens[2], attrs))
        else:
            raise TopologyError(f"line {lineno}: unknown directive {directive!r}")
    links: list[Link] = []
    for lineno, src_label, dst_label, attrs in raw_links:
        for label in (src_label, dst_label):
            if label not in labels:
                raise TopologyError(
                    f"line {lineno}: link references unknown router {label!r}")
        links.append(Link(
            id=len(links),
            src=labels[src_label],
            dst=labels[dst_label],
            fibers=attrs.get("fibers", 1),
            wavelengths_per_fiber=attrs.get("wavelengths", 1),
            reliability_class=attrs.get("class", RELIABLE),
        ))
    # Topology.__post_init__ re-checks everything the parser established,
    # plus capacity constraints (nonpositive W or fibers).
    return Topology(routers=tuple(routers), links=tuple(links), mode=mode)


def serialize(topology: Topology) -> str:
    """Render back to the file format; parse(serialize(t)) == t."""
    lines = [f"mode {topology.mode}"]
    for r in topology.routers:
        lines.append(
            f"router {r.label} converters={r.converter_count} class={r.reliability_class}")
    for l in topology.links:
        lines.append(
            f"link {topology.label(l.src)} {topology.label(l.dst)}"
            f" fibers={l.fibers} wavelengths={l.wavelengths_per_fiber}"
            f" class={l.reliability_class}")
    return "\n".join(lines) + "\n"


def load_topology(path) -> Topology:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_topology(fh.read())
