"""Master/slave planning of level-2 scenarios.

Slaves work on disjoint scenario pools over a frozen LBAG and base ledger:
they may reuse lightpaths but never establish new ones. A scenario that a
slave cannot finish is handed to the master together with the loads it had
committed so far; the master completes it in live mode between slave phases.
"""
from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .model import Demand, NetworkInstance
from .planner import Planner, RoutePool, SolveStats, SolverParams
from .solution import Route, Solution

ScenarioKey = Tuple[int, int]


class FrozenStateViolation(AssertionError):
    """Shared solver state changed while slaves were running."""


@dataclass(frozen=True)
class ParallelParams:
    M: int = 1
    NS: int = 10_000
    NF: int = 64
    NR: int = 1024
    CS: int = 16
    CR: int = 64

    def __post_init__(self):
        for name in ("M", "NS", "NF", "NR", "CS", "CR"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @classmethod
    def from_solver(cls, p: SolverParams) -> "ParallelParams":
        return cls(p.threads, p.pool_size, p.nf, p.nr, p.cs, p.cr)


class SharedFlags:
    """The only state slaves write concurrently; every update holds the lock."""

    def __init__(self):
        self._lock = threading.Lock()
        self.flag_idle = False
        self.n_fail = 0
        self.n_route = 0

    def reset(self) -> None:
        with self._lock:
            self.flag_idle = False
            self.n_fail = 0
            self.n_route = 0

    def set_idle(self) -> None:
        with self._lock:
            self.flag_idle = True

    def add_fail(self, n: int = 1) -> None:
        with self._lock:
            self.n_fail += n

    def add_routes(self, n: int) -> None:
        with self._lock:
            self.n_route += n

    def should_stop(self, pp: ParallelParams) -> bool:
        return self.flag_idle or self.n_fail >= pp.NF or self.n_route >= pp.NR


@dataclass
class BlockedRecord:
    scenario: ScenarioKey
    snapshot: Dict[int, int]
    done: Dict[int, Route]
    pending: List[Demand]


@dataclass
class SlaveResult:
    planned: List[Tuple[ScenarioKey, Dict[int, Route]]] = field(default_factory=list)
    blocked: List[BlockedRecord] = field(default_factory=list)
    routes: RoutePool = field(default_factory=RoutePool)
    stats: SolveStats = field(default_factory=SolveStats)


def assign_pools(n: int, M: int, NS: int) -> List[List[int]]:
    """Pools of 1-based positions: pool t gets t, t+M, t+2M, ... (at most NS each)."""
    return [[t + i * M for i in range(NS) if t + i * M <= n] for t in range(1, M + 1)]


def slave_plan(pl: Planner, pool: Sequence[Tuple[ScenarioKey, List[Demand]]],
               flags: SharedFlags, pp: ParallelParams) -> SlaveResult:
    out = SlaveResult()
    ledger = pl.ledger
    unflushed = 0
    for done_count, ((e1, e2), ks) in enumerate(pool, 1):
        view = ledger.private_view(e1, e2)
        routes: Dict[int, Route] = {}
        blocked_at = None
        for idx, k in enumerate(ks):
            route, new = pl.plan_level2_demand(k, view, frozen=True, extra_pools=(out.routes.routes,),
                                               stats=out.stats)
            if route is None:
                blocked_at = idx
                break
            routes[k.id] = route
            if new and out.routes.add(k.pair, route):
                unflushed += 1
                if unflushed >= pp.CR:
                    flags.add_routes(unflushed)
                    unflushed = 0
                    if flags.should_stop(pp):
                        break
        if blocked_at is not None:
            snap = view.snapshot_loads(pl.lbag.lightpaths)
            out.blocked.append(BlockedRecord((e1, e2), snap, routes, list(ks[blocked_at:])))
            view.close()
            flags.add_fail()
            if flags.should_stop(pp):
                break
            continue
        if len(routes) < len(ks):
            # stopped on the route criterion mid-scenario: hand the rest to the master
            snap = view.snapshot_loads(pl.lbag.lightpaths)
            out.blocked.append(BlockedRecord((e1, e2), snap, routes, list(ks[len(routes):])))
            view.close()
            break
        view.close()
        out.planned.append(((e1, e2), routes))
        if done_count % pp.CS == 0 and flags.should_stop(pp):
            break
    if unflushed:
        flags.add_routes(unflushed)
    flags.set_idle()
    return out


def master_plan(pl: Planner, blocked: Sequence[BlockedRecord], stats: Optional[SolveStats] = None) -> int:
    """Finish blocked scenarios in live mode; returns the number of lightpaths added."""
    before = len(pl.lbag.lightpaths)
    for rec in blocked:
        e1, e2 = rec.scenario
        view = pl.ledger.open_level2(e1, e2, snapshot=rec.snapshot)
        for kid, route in rec.done.items():
            pl.trees[kid].level2[(e1, e2)] = route
        for k in rec.pending:
            pl.check_time()
            route, _ = pl.plan_level2_demand(k, view, frozen=False, stats=stats)
            pl.trees[k.id].level2[(e1, e2)] = route
            pl.pool.add(k.pair, route)
        view.close()
    return len(pl.lbag.lightpaths) - before


def _frozen_state(pl: Planner):
    lb = pl.lbag
    return (len(lb.lightpaths), tuple(lb.free), pl.ledger.fingerprint(), len(pl.pool))


def plan_level2_parallel(pl: Planner, pp: ParallelParams) -> None:
    t0 = time.perf_counter()
    stats = pl.stats
    pl.ledger.begin_level2()
    remaining = pl.level2_order()
    stats.level2_scenarios = len(remaining)
    flags = SharedFlags()
    executor = ThreadPoolExecutor(max_workers=pp.M) if pp.M > 1 else None
    it = 0
    try:
        while remaining:
            pl.check_time()
            it += 1
            flags.reset()
            pools = [[remaining[i - 1] for i in idx] for idx in assign_pools(len(remaining), pp.M, pp.NS)]
            frozen_before = _frozen_state(pl)
            ts = time.perf_counter()
            if executor is None:
                results = [slave_plan(pl, pools[0], flags, pp)]
            else:
                futs = [executor.submit(slave_plan, pl, pool, flags, pp) for pool in pools]
                results = [f.result() for f in futs]
            t_slave = time.perf_counter() - ts
            if _frozen_state(pl) != frozen_before:
                raise FrozenStateViolation(f"shared state changed during slave phase {it}")
            tm = time.perf_counter()
            handled = set()
            blocked: List[BlockedRecord] = []
            for res in results:
                for key, routes in res.planned:
                    handled.add(key)
                    for kid, route in routes.items():
                        pl.trees[kid].level2[key] = route
                    stats.explicit_level2 += len(routes)
                for rec in res.blocked:
                    handled.add(rec.scenario)
                    stats.explicit_level2 += len(rec.done) + len(rec.pending)
                blocked.extend(res.blocked)
                for pair, rs in res.routes.routes.items():
                    for r in rs:
                        pl.pool.add(pair, r)
                s = res.stats
                stats.searches += s.searches
                stats.label_pops += s.label_pops
                stats.reuse_hits += s.reuse_hits
                stats.reuse_attempts += s.reuse_attempts
            order = {key: i for i, (key, _) in enumerate(remaining)}
            blocked.sort(key=lambda r: order[r.scenario])
            added = master_plan(pl, blocked)
            stats.iterations.append({
                "iteration": it,
                "pooled": sum(len(p) for p in pools),
                "planned": sum(len(r.planned) for r in results),
                "blocked": len(blocked),
                "new_lightpaths": added,
                "lightpaths_constant": True,
                "slave_time": t_slave,
                "master_time": time.perf_counter() - tm,
            })
            remaining = [item for item in remaining if item[0] not in handled]
    finally:
        if executor is not None:
            executor.shutdown()
    stats.time_level2 = time.perf_counter() - t0


def solve_parallel(instance: NetworkInstance, params: Optional[SolverParams] = None,
                   planner: Optional[Planner] = None) -> Solution:
    t0 = time.perf_counter()
    pl = planner or Planner(instance, params)
    pl.plan_working()
    pl.plan_level1()
    plan_level2_parallel(pl, ParallelParams.from_solver(pl.params))
    return pl.finish(t0)
