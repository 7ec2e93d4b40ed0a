"""Best-first label search on the LBAG with heuristic dominance.

A label is a partial LBAG path from ``s'``. Node sets (``V``), link sets (``U``),
used lightpaths and wavelength sets are int bitmasks so that extension and
dominance stay cheap in pure Python.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .lbag import CostParams, Lbag, lowest_bit, popcount
from .model import Demand, Lightpath, Scenario

NONE, TRANSMITTER, RECEIVER, PHYSICAL, LOGICAL = 0, 1, 2, 3, 4

NO_PATH = "no-path"
FROZEN_EXHAUSTED = "frozen-exhausted"
LABEL_GUARD = "label-guard"

REMOVE_L2, SHRINK_W2, KEEP = "remove", "shrink", "none"


class Label:
    __slots__ = ("node", "cost", "d", "W", "V", "U", "lps", "seg", "kind", "ref",
                 "parent", "alive", "popped")

    def __init__(self, node, cost, d, W, V, U, lps, seg, kind, ref, parent):
        self.node = node
        self.cost = cost
        self.d = d
        self.W = W
        self.V = V
        self.U = U
        self.lps = lps
        self.seg = seg
        self.kind = kind
        self.ref = ref
        self.parent = parent
        self.alive = True
        self.popped = False

    def arcs(self) -> List[Tuple[int, int, int]]:
        """(kind, ref, head) of every arc on the path, source first."""
        out = []
        x = self
        while x.parent is not None:
            out.append((x.kind, x.ref, x.node))
            x = x.parent
        out.reverse()
        return out


@dataclass
class SearchContext:
    demand: Demand
    scenario: Scenario
    params: CostParams = field(default_factory=CostParams)
    chi: frozenset = frozenset()
    capacity_ok: Callable[[int], bool] = lambda l: True
    frozen: bool = False
    max_pops: int = 5_000_000
    use_bound: bool = True
    rules: frozenset = frozenset({1, 2, 3})
    stop_on_pop: bool = False
    record_pops: Optional[list] = None


@dataclass
class RouteResult:
    route: Tuple[int, ...]
    new_lightpaths: List[Lightpath]
    cost: float
    pops: int


@dataclass
class Blocked:
    reason: str
    pops: int

    def __bool__(self):
        return False


def wavelength_condition(lbag: Lbag, failed: Sequence[int]) -> bool:
    """True when some wavelength is free on every non-failed link that has any free."""
    inter = lbag.full_mask
    fs = set(failed)
    for e, m in enumerate(lbag.free):
        if m and e not in fs:
            inter &= m
    return inter != 0


def dominate(L1: Label, L2: Label, n: int, rule3: bool, rules=frozenset({1, 2, 3})) -> str:
    """Apply the heuristic dominance rules of ``L1`` over ``L2`` (may shrink ``L2.W``)."""
    if L1.node != L2.node or L1.cost > L2.cost:
        return KEEP
    if L1.node >= n:
        return REMOVE_L2 if 1 in rules else KEEP
    if L1.d > L2.d or 2 not in rules:
        return KEEP
    if rule3 and 3 in rules:
        return REMOVE_L2
    L2.W &= ~L1.W
    return REMOVE_L2 if not L2.W else SHRINK_W2


def establish_lightpath(lbag: Lbag, links: Sequence[int]) -> Lightpath:
    """New lightpath on the smallest wavelength free on every link of ``links``."""
    inter = lbag.full_mask
    for e in links:
        inter &= lbag.free[e]
    if not inter:
        raise ValueError(f"no common free wavelength on links {tuple(links)}")
    return lbag.new_lightpath(lowest_bit(inter), links)


def find_route(lbag: Lbag, hops: np.ndarray, ctx: SearchContext):
    """Search a route for ``ctx.demand`` in ``ctx.scenario``.

    Returns a RouteResult (new lightpaths already registered in ``lbag`` unless
    frozen) or a falsy Blocked.
    """
    inst = lbag.instance
    n = lbag.n
    s, t = ctx.demand.s, ctx.demand.t
    target = n + t
    if ctx.use_bound:
        hcol = [int(x) for x in hops[:, t]]
    else:
        hcol = [0] * n
    failed = ctx.scenario.failed
    fmask = 0
    for e in failed:
        fmask |= 1 << e
    working = ctx.scenario.level == 0
    p = ctx.params
    Wn = lbag.n_wavelengths
    full = lbag.full_mask
    free = lbag.free
    chi = ctx.chi
    chi_mask = 0
    for e in chi:
        chi_mask |= 1 << e
    gamma = p.gamma
    pcost = [1.0 + p.beta * (1.0 - popcount(m) / Wn) ** p.theta for m in free]
    for e in chi:
        pcost[e] += gamma
    link_len = lbag.link_len
    reach = inst.reach
    phys_adj = lbag.phys_adj
    logical_adj = lbag.logical_adj
    lp_link_mask = lbag.lp_link_mask
    lp_node_mask = lbag.lp_node_mask
    lightpaths = lbag.lightpaths
    capacity_ok = ctx.capacity_ok
    alpha = p.alpha
    frozen = ctx.frozen
    rules = ctx.rules
    rule1 = 1 in rules
    rule2 = 2 in rules
    rule3 = 3 in rules and rule2 and wavelength_condition(lbag, failed)
    record = ctx.record_pops
    stop_on_pop = ctx.stop_on_pop
    lp_cost_cache = {}

    buckets: List[List[Label]] = [[] for _ in range(2 * n)]
    heap: list = []
    counter = 0

    def insert(L2: Label) -> None:
        nonlocal counter
        bucket = buckets[L2.node]
        if L2.node >= n:
            if rule1:
                c2 = L2.cost
                for L1 in bucket:
                    if L1.cost <= c2:
                        return
                for L1 in bucket:
                    if c2 <= L1.cost:
                        L1.alive = False
                bucket[:] = [x for x in bucket if x.alive]
        elif rule2:
            c2, d2 = L2.cost, L2.d
            for L1 in bucket:
                if L1.cost <= c2 and L1.d <= d2:
                    if rule3:
                        return
                    L2.W &= ~L1.W
                    if not L2.W:
                        return
            pruned = False
            for L1 in bucket:
                if c2 <= L1.cost and d2 <= L1.d:
                    if rule3:
                        L1.alive = False
                    else:
                        L1.W &= ~L2.W
                        if not L1.W:
                            L1.alive = False
                    pruned = pruned or not L1.alive
            if pruned:
                bucket[:] = [x for x in bucket if x.alive]
        bucket.append(L2)
        counter += 1
        heapq.heappush(heap, (L2.cost, counter, L2))

    def build(L: Label):
        route: List[int] = []
        new: List[Lightpath] = []
        seg: List[int] = []
        for kind, ref, _ in L.arcs():
            if kind == LOGICAL:
                route.append(ref)
            elif kind == TRANSMITTER:
                seg = []
            elif kind == PHYSICAL:
                seg.append(ref)
            elif kind == RECEIVER:
                lp = establish_lightpath(lbag, seg)
                new.append(lp)
                route.append(lp.id)
        return RouteResult(tuple(route), new, L.cost - hcol[t], pops)

    L0 = Label(n + s, float(hcol[s]), 0, full, 1 << s, 0, 0, 0, NONE, -1, None)
    buckets[n + s].append(L0)
    heap.append((L0.cost, 0, L0))
    pops = 0
    while heap:
        c, _, L = heapq.heappop(heap)
        if not L.alive:
            continue
        L.popped = True
        bucket = buckets[L.node]
        if L in bucket:
            bucket.remove(L)
        pops += 1
        if record is not None:
            record.append(c)
        if pops > ctx.max_pops:
            return Blocked(LABEL_GUARD, pops)
        j = L.node
        if stop_on_pop and j == target:
            return build(L)
        if j >= n:
            i = j - n
            hi = hcol[i]
            V = L.V
            lps = L.lps
            for lp, o in logical_adj[i]:
                if lp_link_mask[lp] & fmask:
                    continue
                bit = 1 << lp
                if lps & bit:
                    continue
                nmask = lp_node_mask[lp]
                if working and V & (nmask & ~(1 << i)):
                    continue
                if not capacity_ok(lp):
                    continue
                lc = lp_cost_cache.get(lp)
                if lc is None:
                    lc = len(lightpaths[lp].links)
                    if chi_mask:
                        lc += gamma * popcount(lp_link_mask[lp] & chi_mask)
                    lp_cost_cache[lp] = lc
                L2 = Label(n + o, c + lc - hi + hcol[o], 0, full, V | nmask, L.U,
                           lps | bit, 0, LOGICAL, lp, L)
                if n + o == target and not stop_on_pop:
                    return build(L2)
                insert(L2)
            if not frozen:
                insert(Label(i, c + alpha, 0, full, V, L.U, lps, 1 << i, TRANSMITTER, -1, L))
        else:
            i = j
            hi = hcol[i]
            V, U, seg, W, d = L.V, L.U, L.seg, L.W, L.d
            for e, o in phys_adj[i]:
                eb = 1 << e
                if (fmask | U) & eb:
                    continue
                ob = 1 << o
                if seg & ob or (working and V & ob):
                    continue
                nd = d + link_len[e]
                if nd > reach:
                    continue
                nW = W & free[e]
                if not nW:
                    continue
                insert(Label(o, c + pcost[e] - hi + hcol[o], nd, nW, V | ob, U | eb,
                             L.lps, seg | ob, PHYSICAL, e, L))
            if L.kind == PHYSICAL:
                L2 = Label(n + i, c, 0, full, V, U, L.lps, 0, RECEIVER, -1, L)
                if n + i == target and not stop_on_pop:
                    return build(L2)
                insert(L2)
    return Blocked(FROZEN_EXHAUSTED if frozen else NO_PATH, pops)
