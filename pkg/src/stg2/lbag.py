"""Two-layer link-bundled auxiliary graph (LBAG), arc costs and min-hop bounds.

Graph nodes are integers: physical node ``i`` is ``i`` and its logical copy
``i'`` is ``n + i``. Wavelength sets are int bitmasks (bit ``w`` = wavelength w).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterator, List, NamedTuple, Sequence, Tuple

import numpy as np

from .model import Lightpath, NetworkInstance, make_lightpath

HOP_INF = int(np.iinfo(np.int16).max)

TRANSMITTER, RECEIVER, PHYSICAL, LOGICAL = "t", "r", "p", "l"


class WavelengthClash(ValueError):
    pass


@dataclass(frozen=True)
class CostParams:
    alpha: float = 32.0
    beta: float = 32.0
    gamma: float = 2.0
    theta: float = 3.0

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma, self.theta) <= 0:
            raise ValueError("cost parameters must be strictly positive")


class Arc(NamedTuple):
    kind: str
    tail: int
    head: int
    ref: int  # link id, lightpath id, or -1 for transmitter/receiver


def min_hop_table(instance: NetworkInstance) -> np.ndarray:
    """All-pairs hop counts (every link counted as 1); HOP_INF between components."""
    n = instance.n_nodes
    adj: List[List[int]] = [[] for _ in range(n)]
    for ln in instance.links:
        adj[ln.a].append(ln.b)
        adj[ln.b].append(ln.a)
    h = np.full((n, n), HOP_INF, dtype=np.int16)
    for src in range(n):
        row = h[src]
        row[src] = 0
        dq = deque([src])
        while dq:
            u = dq.popleft()
            du = row[u] + 1
            for v in adj[u]:
                if row[v] == HOP_INF:
                    row[v] = du
                    dq.append(v)
    return h


def popcount(x: int) -> int:
    return bin(x).count("1")


def lowest_bit(x: int) -> int:
    return (x & -x).bit_length() - 1


class Lbag:
    def __init__(self, instance: NetworkInstance, lightpaths: Sequence[Lightpath] = ()):
        self.instance = instance
        self.n = instance.n_nodes
        self.n_wavelengths = instance.wavelengths
        self.full_mask = (1 << instance.wavelengths) - 1
        self.link_len = [ln.length for ln in instance.links]
        self.free: List[int] = [self.full_mask] * instance.n_links
        self.phys_adj: List[List[Tuple[int, int]]] = [[] for _ in range(self.n)]
        for ln in instance.links:
            self.phys_adj[ln.a].append((ln.id, ln.b))
            self.phys_adj[ln.b].append((ln.id, ln.a))
        self.lightpaths: Dict[int, Lightpath] = {}
        self.logical_adj: List[List[Tuple[int, int]]] = [[] for _ in range(self.n)]
        self.lp_link_mask: Dict[int, int] = {}
        self.lp_node_mask: Dict[int, int] = {}
        self.lps_on_link: List[List[int]] = [[] for _ in range(instance.n_links)]
        self.next_id = 0
        for lp in lightpaths:
            self.add_lightpath(lp)

    # -- mutation -----------------------------------------------------------
    def add_lightpath(self, lp: Lightpath) -> None:
        bit = 1 << lp.wavelength
        for e in lp.links:
            if not self.free[e] & bit:
                raise WavelengthClash(
                    f"wavelength {lp.wavelength} already occupied on link {e} (lightpath {lp.id})")
        if lp.id in self.lightpaths:
            raise ValueError(f"duplicate lightpath id {lp.id}")
        lmask = 0
        for e in lp.links:
            self.free[e] &= ~bit
            self.lps_on_link[e].append(lp.id)
            lmask |= 1 << e
        nmask = 0
        for v in lp.nodes:
            nmask |= 1 << v
        self.lightpaths[lp.id] = lp
        self.lp_link_mask[lp.id] = lmask
        self.lp_node_mask[lp.id] = nmask
        a, b = lp.endpoints
        self.logical_adj[a].append((lp.id, b))
        self.logical_adj[b].append((lp.id, a))
        self.next_id = max(self.next_id, lp.id + 1)

    def new_lightpath(self, wavelength: int, links: Sequence[int]) -> Lightpath:
        lp = make_lightpath(self.next_id, wavelength, links, self.instance)
        self.add_lightpath(lp)
        return lp

    # -- structure ----------------------------------------------------------
    @property
    def n_graph_nodes(self) -> int:
        return 2 * self.n

    def arc_counts(self) -> Dict[str, int]:
        return {PHYSICAL: 2 * self.instance.n_links, LOGICAL: 2 * len(self.lightpaths),
                TRANSMITTER: self.n, RECEIVER: self.n}

    def arcs(self) -> Iterator[Arc]:
        n = self.n
        for ln in self.instance.links:
            yield Arc(PHYSICAL, ln.a, ln.b, ln.id)
            yield Arc(PHYSICAL, ln.b, ln.a, ln.id)
        for lp in self.lightpaths.values():
            a, b = lp.endpoints
            yield Arc(LOGICAL, n + a, n + b, lp.id)
            yield Arc(LOGICAL, n + b, n + a, lp.id)
        for i in range(n):
            yield Arc(TRANSMITTER, n + i, i, -1)
            yield Arc(RECEIVER, i, n + i, -1)

    def free_wavelengths(self, e: int) -> List[int]:
        m = self.free[e]
        return [w for w in range(self.n_wavelengths) if m >> w & 1]

    # -- costs --------------------------------------------------------------
    def physical_cost(self, e: int, params: CostParams, chi: frozenset = frozenset()) -> float:
        used = 1.0 - popcount(self.free[e]) / self.n_wavelengths
        return 1.0 + params.beta * used ** params.theta + (params.gamma if e in chi else 0.0)

    def logical_cost(self, lp_id: int, params: CostParams, chi: frozenset = frozenset()) -> float:
        links = self.lightpaths[lp_id].links
        return len(links) + params.gamma * sum(1 for e in links if e in chi)

    def arc_cost(self, arc: Arc, params: CostParams, chi: frozenset = frozenset()) -> float:
        if arc.kind == TRANSMITTER:
            return params.alpha
        if arc.kind == RECEIVER:
            return 0.0
        if arc.kind == PHYSICAL:
            return self.physical_cost(arc.ref, params, chi)
        return self.logical_cost(arc.ref, params, chi)
