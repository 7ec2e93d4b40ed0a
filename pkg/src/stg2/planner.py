"""Hierarchical constructive heuristic: working, then level-1, then level-2 routes."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .aggregation import AggregationMap, aggregate_demands, expand_solution, identity_map
from .labeling import Blocked, RouteResult, SearchContext, find_route
from .lbag import CostParams, Lbag, min_hop_table
from .ledger import Ledger, Level2View
from .model import WORKING, Demand, NetworkInstance, Scenario
from .solution import Route, RoutingTree, Solution, resolve_route  # noqa: F401  (re-export)

log = logging.getLogger(__name__)


class Infeasible(RuntimeError):
    def __init__(self, demand: int, scenario: Scenario, reason: str = ""):
        super().__init__(f"demand {demand} blocked in scenario ({scenario.first}, {scenario.second})"
                         + (f": {reason}" if reason else ""))
        self.demand = demand
        self.scenario = scenario
        self.reason = reason


class SolveTimeout(RuntimeError):
    pass


@dataclass
class SolverParams:
    cost: CostParams = field(default_factory=CostParams)
    threads: int = 1
    pool_size: int = 10_000
    nf: int = 64
    nr: int = 1024
    cs: int = 16
    cr: int = 64
    max_pops: int = 5_000_000
    time_limit: Optional[float] = None
    aggregate: bool = True
    reuse: bool = True
    use_bound: bool = True
    rules: frozenset = frozenset({1, 2, 3})
    trace: bool = False

    def __post_init__(self):
        for name in ("threads", "pool_size", "nf", "nr", "cs", "cr", "max_pops"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class SolveStats:
    objective: int = 0
    aggregated_demands: int = 0
    searches: int = 0
    reuse_hits: int = 0
    reuse_attempts: int = 0
    label_pops: int = 0
    explicit_level1: int = 0
    explicit_level2: int = 0
    level2_scenarios: int = 0
    time_working: float = 0.0
    time_level1: float = 0.0
    time_level2: float = 0.0
    time_total: float = 0.0
    iterations: List[dict] = field(default_factory=list)

    @property
    def reuse_rate(self) -> float:
        return self.reuse_hits / self.reuse_attempts if self.reuse_attempts else 0.0


class RoutePool:
    """Generated routes per unordered terminal pair, in insertion order."""

    def __init__(self):
        self.routes: Dict[Tuple[int, int], List[Route]] = {}
        self._seen: set = set()

    def add(self, pair: Tuple[int, int], route: Route) -> bool:
        if route in self._seen or route[::-1] in self._seen:
            return False
        self._seen.add(route)
        self.routes.setdefault(pair, []).append(route)
        return True

    def get(self, pair: Tuple[int, int]) -> List[Route]:
        return self.routes.get(pair, [])

    def __len__(self) -> int:
        return len(self._seen)

    def __contains__(self, route) -> bool:
        return route in self._seen or route[::-1] in self._seen


class Planner:
    def __init__(self, instance: NetworkInstance, params: Optional[SolverParams] = None):
        self.instance = instance
        self.params = params or SolverParams()
        p = self.params
        self.amap: AggregationMap = (aggregate_demands(instance.demands, instance.capacity)
                                     if p.aggregate else identity_map(instance.demands))
        self.demands: List[Demand] = self.amap.demands
        self.order: List[Demand] = sorted(self.demands, key=lambda d: (-d.volume, d.id))
        self.hops = min_hop_table(instance)
        self.lbag = Lbag(instance)
        self.ledger = Ledger(instance.capacity, instance.n_links, trace=[] if p.trace else None)
        self.pool = RoutePool()
        self.trees: Dict[int, RoutingTree] = {d.id: RoutingTree() for d in self.demands}
        self.work_mask: Dict[int, int] = {}
        self.stats = SolveStats(aggregated_demands=len(self.demands))
        self.deadline = None if p.time_limit is None else time.monotonic() + p.time_limit

    # -- helpers --------------------------------------------------------------
    def check_time(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SolveTimeout(f"time limit of {self.params.time_limit}s exceeded")

    def link_mask(self, route: Route) -> int:
        # no cache: slaves call this concurrently and must not write shared state
        m = 0
        lm = self.lbag.lp_link_mask
        for l in route:
            m |= lm[l]
        return m

    def links_of(self, route: Route) -> List[int]:
        m = self.link_mask(route)
        return [e for e in range(self.instance.n_links) if m >> e & 1]

    def search(self, k: Demand, scenario: Scenario, capacity_ok: Callable[[int], bool],
               chi: frozenset = frozenset(), frozen: bool = False, stats=None):
        p = self.params
        stats = stats or self.stats
        ctx = SearchContext(k, scenario, p.cost, chi, capacity_ok, frozen, p.max_pops,
                            p.use_bound, p.rules)
        res = find_route(self.lbag, self.hops, ctx)
        stats.searches += 1
        stats.label_pops += res.pops
        return res

    def reuse_route(self, k: Demand, failed_mask: int, check: Callable[[int], bool],
                    candidates, stats=None) -> Optional[Route]:
        """First pooled route avoiding ``failed_mask`` whose lightpaths all pass ``check``."""
        if not self.params.reuse:
            return None
        stats = stats or self.stats
        stats.reuse_attempts += 1
        for pool in candidates:
            for r in pool:
                if self.link_mask(r) & failed_mask:
                    continue
                if all(check(l) for l in r):
                    stats.reuse_hits += 1
                    return r
        return None

    # -- phases -------------------------------------------------------------------
    def plan_working(self) -> None:
        t0 = time.perf_counter()
        ledger = self.ledger
        for k in self.order:
            self.check_time()
            b = k.volume
            res = self.search(k, WORKING, lambda l, k=k.id, b=b: ledger.check_capacity(k, b, l, WORKING))
            if not res:
                raise Infeasible(k.id, WORKING, res.reason)
            ledger.commit_working(k.id, b, res.route)
            self.trees[k.id].working = res.route
            self.work_mask[k.id] = self.link_mask(res.route)
            self.pool.add(k.pair, res.route)
        self.stats.time_working = time.perf_counter() - t0

    def level1_order(self) -> List[Tuple[int, List[Demand]]]:
        E = self.instance.n_links
        per: Dict[int, List[Demand]] = {e: [] for e in range(E)}
        for k in self.order:
            m = self.work_mask[k.id]
            for e in range(E):
                if m >> e & 1:
                    per[e].append(k)
        return sorted(((e, ks) for e, ks in per.items() if ks), key=lambda x: (-len(x[1]), x[0]))

    def plan_level1(self) -> None:
        t0 = time.perf_counter()
        ledger = self.ledger
        ledger.begin_level1()
        for e1, ks in self.level1_order():
            scen = Scenario(e1)
            fmask = 1 << e1
            for k in ks:
                self.check_time()
                b = k.volume
                tree = self.trees[k.id]

                def check(l, k=k.id, b=b):
                    return ledger.check_capacity(k, b, l, scen)

                route = self.reuse_route(k, fmask, check, [self.pool.get(k.pair)])
                if route is None:
                    wm = self.work_mask[k.id]
                    chi = frozenset(e for e in range(self.instance.n_links)
                                    if wm >> e & 1 and e not in tree.level1)
                    res = self.search(k, scen, check, chi)
                    if not res:
                        raise Infeasible(k.id, scen, res.reason)
                    route = res.route
                    self.pool.add(k.pair, route)
                ledger.commit_level1(k.id, b, e1, route, self.links_of(route),
                                     self.links_of(tree.working))
                tree.level1[e1] = route
                self.stats.explicit_level1 += 1
        self.stats.time_level1 = time.perf_counter() - t0

    def level2_order(self) -> List[Tuple[Tuple[int, int], List[Demand]]]:
        """Level-2 scenarios needing explicit routes, most demands first."""
        E = self.instance.n_links
        per: Dict[int, List[Demand]] = {}
        for k in self.order:
            tree = self.trees[k.id]
            wl = self.links_of(tree.working)
            wset = set(wl)
            for e1 in range(E):
                if e1 in wset:
                    for e2 in self.links_of(tree.level1[e1]):
                        per.setdefault(e1 * E + e2, []).append(k)
                else:
                    for e2 in wl:
                        per.setdefault(e1 * E + e2, []).append(k)
        items = sorted(per.items(), key=lambda x: (-len(x[1]), x[0]))
        return [(divmod(key, E), ks) for key, ks in items]

    def plan_level2_demand(self, k: Demand, view: Level2View, frozen: bool,
                           extra_pools=(), stats=None) -> Tuple[Optional[Route], bool]:
        """Reuse-then-search one demand; returns (route, newly_generated)."""
        e1, e2 = view.e1, view.e2
        fmask = (1 << e1) | (1 << e2)
        b = k.volume

        def check(l, k=k.id, b=b):
            return view.check(k, b, l)

        pools = [self.pool.get(k.pair)] + [p.get(k.pair, ()) for p in extra_pools]
        route = self.reuse_route(k, fmask, check, pools, stats)
        if route is not None:
            view.commit(k.id, b, route)
            return route, False
        res = self.search(k, view.scenario, check, frozen=frozen, stats=stats)
        if not res:
            if frozen:
                return None, False
            raise Infeasible(k.id, view.scenario, res.reason)
        view.commit(k.id, b, res.route)
        return res.route, True

    def plan_level2(self) -> None:
        t0 = time.perf_counter()
        ledger = self.ledger
        ledger.begin_level2()
        todo = self.level2_order()
        self.stats.level2_scenarios = len(todo)
        for (e1, e2), ks in todo:
            view = ledger.open_level2(e1, e2)
            for k in ks:
                self.check_time()
                route, _ = self.plan_level2_demand(k, view, frozen=False)
                self.trees[k.id].level2[(e1, e2)] = route
                self.pool.add(k.pair, route)
                self.stats.explicit_level2 += 1
            view.close()
        self.stats.time_level2 = time.perf_counter() - t0

    # -- results ------------------------------------------------------------------
    def aggregated_solution(self) -> Solution:
        return Solution(dict(self.lbag.lightpaths), dict(self.trees))

    def solution(self) -> Solution:
        return expand_solution(self.aggregated_solution(), self.amap)

    def finish(self, t_start: float) -> Solution:
        self.stats.objective = len(self.lbag.lightpaths)
        self.stats.time_total = time.perf_counter() - t_start
        return self.solution()


def solve(instance: NetworkInstance, params: Optional[SolverParams] = None,
          planner: Optional[Planner] = None) -> Solution:
    """Single-threaded construction; returns the per-original-demand solution."""
    t0 = time.perf_counter()
    pl = planner or Planner(instance, params)
    pl.plan_working()
    pl.plan_level1()
    pl.plan_level2()
    return pl.finish(t0)
