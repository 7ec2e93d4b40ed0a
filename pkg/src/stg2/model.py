"""Domain types for STG2 instances: links, demands, scenarios, lightpaths, routes."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple


class StructureError(ValueError):
    """Raised for structurally malformed lightpaths or routes."""


@dataclass(frozen=True)
class Link:
    id: int
    a: int
    b: int
    length: int

    def other(self, node: int) -> int:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise StructureError(f"node {node} is not an endpoint of link {self.id}")


@dataclass(frozen=True)
class Demand:
    id: int
    s: int
    t: int
    volume: int
    origins: Tuple[int, ...] = ()

    @property
    def pair(self) -> Tuple[int, int]:
        return (self.s, self.t) if self.s < self.t else (self.t, self.s)


@dataclass(frozen=True)
class Scenario:
    """Failure state: ``first`` fails, then ``second``. ``None`` means no failure."""

    first: Optional[int] = None
    second: Optional[int] = None

    def __post_init__(self):
        if self.second is not None and (self.first is None or self.first == self.second):
            raise ValueError(f"invalid scenario ({self.first}, {self.second})")

    @property
    def level(self) -> int:
        if self.first is None:
            return 0
        return 1 if self.second is None else 2

    @property
    def failed(self) -> Tuple[int, ...]:
        return tuple(e for e in (self.first, self.second) if e is not None)

    def index(self, n_links: int) -> int:
        """Dense key: 0 working, 1 + e1 level-1, 1 + E + e1*E + e2 level-2."""
        if self.first is None:
            return 0
        if self.second is None:
            return 1 + self.first
        return 1 + n_links + self.first * n_links + self.second

    @classmethod
    def from_index(cls, idx: int, n_links: int) -> "Scenario":
        if idx == 0:
            return cls()
        if idx <= n_links:
            return cls(idx - 1)
        e1, e2 = divmod(idx - 1 - n_links, n_links)
        return cls(e1, e2)


WORKING = Scenario()


@dataclass
class NetworkInstance:
    n_nodes: int
    links: List[Link]
    wavelengths: int
    capacity: int
    reach: int
    demands: List[Demand] = field(default_factory=list)
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for i, ln in enumerate(self.links):
            if ln.id != i:
                raise ValueError(f"link ids must be dense and ascending, got {ln.id} at {i}")
            if ln.a == ln.b:
                raise ValueError(f"link {ln.id} is a self-loop")
            if not (0 <= ln.a < self.n_nodes and 0 <= ln.b < self.n_nodes):
                raise ValueError(f"link {ln.id} has an unknown endpoint")
            if ln.length <= 0:
                raise ValueError(f"link {ln.id} has non-positive length")
        if self.wavelengths < 1 or self.capacity < 1 or self.reach < 1:
            raise ValueError("wavelengths, capacity and reach must be positive")
        for i, d in enumerate(self.demands):
            if d.id != i:
                raise ValueError(f"demand ids must be dense and ascending, got {d.id} at {i}")
            if d.s == d.t:
                raise ValueError(f"demand {d.id} has identical terminals")
            if not (0 <= d.s < self.n_nodes and 0 <= d.t < self.n_nodes):
                raise ValueError(f"demand {d.id} has an unknown terminal")
            if not 0 < d.volume <= self.capacity:
                raise ValueError(f"demand {d.id} volume {d.volume} outside (0, {self.capacity}]")

    @property
    def nodes(self) -> range:
        return range(self.n_nodes)

    @property
    def n_links(self) -> int:
        return len(self.links)


def scenario_universe(link_count: int) -> Tuple[int, int, int]:
    """Number of (working, level-1, level-2) scenarios for ``link_count`` links."""
    if link_count < 1:
        raise ValueError("link_count must be >= 1")
    return 1, link_count, link_count * link_count - link_count


def iter_scenarios(n_links: int) -> Iterable[Scenario]:
    yield WORKING
    for e1 in range(n_links):
        yield Scenario(e1)
    for e1 in range(n_links):
        for e2 in range(n_links):
            if e1 != e2:
                yield Scenario(e1, e2)


def path_nodes(links: Sequence[int], instance: NetworkInstance) -> Tuple[int, ...]:
    """Node sequence of a connected link sequence.

    A single link is read a -> b; longer sequences start at the endpoint of the
    first link that the second link does not touch.
    """
    if not links:
        raise StructureError("empty link sequence")
    L = instance.links
    for e in links:
        if not 0 <= e < len(L):
            raise StructureError(f"unknown link {e}")
    first = L[links[0]]
    if len(links) == 1:
        return (first.a, first.b)
    second = L[links[1]]
    if first.a in (second.a, second.b) and first.b not in (second.a, second.b):
        start = first.b
    elif first.b in (second.a, second.b) and first.a not in (second.a, second.b):
        start = first.a
    elif first.a in (second.a, second.b):
        # parallel pair shares both endpoints; read a -> b
        start = first.a
    else:
        raise StructureError(f"links {links[0]} and {links[1]} are not adjacent")
    nodes = [start]
    cur = start
    for e in links:
        cur = L[e].other(cur) if cur in (L[e].a, L[e].b) else None
        if cur is None:
            raise StructureError(f"link sequence {tuple(links)} is not connected")
        nodes.append(cur)
    return tuple(nodes)


@dataclass(frozen=True)
class Lightpath:
    id: int
    wavelength: int
    links: Tuple[int, ...]
    nodes: Tuple[int, ...]
    length: int

    @property
    def endpoints(self) -> Tuple[int, int]:
        return self.nodes[0], self.nodes[-1]

    def other_end(self, node: int) -> int:
        a, b = self.endpoints
        if node == a:
            return b
        if node == b:
            return a
        raise StructureError(f"node {node} is not an endpoint of lightpath {self.id}")

    def nodes_from(self, node: int) -> Tuple[int, ...]:
        if node == self.nodes[0]:
            return self.nodes
        if node == self.nodes[-1]:
            return self.nodes[::-1]
        raise StructureError(f"node {node} is not an endpoint of lightpath {self.id}")


def make_lightpath(lp_id: int, wavelength: int, links: Sequence[int],
                   instance: NetworkInstance, check_reach: bool = True) -> Lightpath:
    links = tuple(links)
    if len(set(links)) != len(links):
        raise StructureError(f"lightpath {lp_id} repeats a link")
    if not 0 <= wavelength < instance.wavelengths:
        raise StructureError(f"lightpath {lp_id} wavelength {wavelength} out of range")
    nodes = path_nodes(links, instance)
    if len(set(nodes)) != len(nodes):
        raise StructureError(f"lightpath {lp_id} revisits a node")
    length = sum(instance.links[e].length for e in links)
    if check_reach and length > instance.reach:
        raise StructureError(f"lightpath {lp_id} length {length} exceeds reach {instance.reach}")
    return Lightpath(lp_id, wavelength, links, nodes, length)


def route_nodes(route: Sequence[int], lightpaths: Dict[int, Lightpath],
                start: Optional[int] = None) -> Tuple[int, ...]:
    """Physical node sequence of a route, walked from ``start``.

    Without ``start`` both endpoints of the first lightpath are tried.
    """
    if not route:
        raise StructureError("empty route")
    if len(set(route)) != len(route):
        raise StructureError("route repeats a lightpath")
    for l in route:
        if l not in lightpaths:
            raise StructureError(f"route references unknown lightpath {l}")
    starts = [start] if start is not None else list(dict.fromkeys(lightpaths[route[0]].endpoints))
    for st in starts:
        seq: List[int] = [st]
        cur = st
        ok = True
        for l in route:
            lp = lightpaths[l]
            if cur not in lp.endpoints:
                ok = False
                break
            part = lp.nodes_from(cur)
            seq.extend(part[1:])
            cur = part[-1]
        if ok:
            return tuple(seq)
    raise StructureError(f"route {tuple(route)} is not end-to-end connected")


def route_endpoints(route: Sequence[int], lightpaths: Dict[int, Lightpath],
                    start: Optional[int] = None) -> Tuple[int, int]:
    seq = route_nodes(route, lightpaths, start)
    return seq[0], seq[-1]


def route_links(route: Sequence[int], lightpaths: Dict[int, Lightpath]) -> frozenset:
    out = set()
    for l in route:
        out.update(lightpaths[l].links)
    return frozenset(out)


def route_is_elementary(route: Sequence[int], lightpaths: Dict[int, Lightpath],
                        start: Optional[int] = None) -> bool:
    seq = route_nodes(route, lightpaths, start)
    return len(set(seq)) == len(seq)


def route_avoids(route: Sequence[int], lightpaths: Dict[int, Lightpath],
                 scenario: Scenario) -> bool:
    failed = scenario.failed
    if not failed:
        return True
    return not any(e in failed for l in route for e in lightpaths[l].links)
