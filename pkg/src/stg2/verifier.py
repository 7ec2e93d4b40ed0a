"""Full-constraint feasibility check of a solution over every scenario.

Everything is re-derived from the instance and the solution records. Capacity
uses the reservation rule: a demand's working bandwidth stays booked on its
working lightpaths in every scenario, so a scenario only adds the bandwidth of
lightpaths a demand uses there but not in the working scenario. Scenarios are
streamed one at a time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .aggregation import AggregationMap
from .model import (NetworkInstance, Scenario, StructureError, path_nodes,
                    route_nodes, scenario_universe)
from .solution import Route, Solution, resolve_route

WAVELENGTH = "wavelength-assignment"
LIGHTPATH = "lightpath-structure"
REACH = "optical-reach"
ELEMENTARY = "working-elementary"
ROUTE = "route-structure"
COVERAGE = "coverage"
FAILED_LINK = "failed-link"
CONSISTENCY = "consistent-routing"
CAPACITY = "capacity"


@dataclass
class Violation:
    kind: str
    demand: Optional[int] = None
    scenario: Optional[tuple] = None
    lightpath: Optional[int] = None
    detail: str = ""

    def __str__(self):
        parts = [f"kind={self.kind}"]
        if self.demand is not None:
            parts.append(f"demand={self.demand}")
        if self.scenario is not None:
            parts.append("scenario=({},{})".format(*[x if x is not None else 0 for x in self.scenario]))
        if self.lightpath is not None:
            parts.append(f"lightpath={self.lightpath}")
        if self.detail:
            parts.append(f"detail={self.detail!r}")
        return "violation " + " ".join(parts)


@dataclass
class VerifyReport:
    feasible: bool
    objective: int
    violations: List[Violation] = field(default_factory=list)
    stats: Dict[str, float] = field(default_factory=dict)

    def lines(self, max_violations: int = 50) -> List[str]:
        out = [f"feasible={int(self.feasible)}", f"objective={self.objective}",
               f"violations={len(self.violations)}"]
        out += [f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in self.stats.items()]
        out += [str(v) for v in self.violations[:max_violations]]
        return out


def objective(solution: Solution) -> int:
    return len(solution.lightpaths)


def verify(instance: NetworkInstance, solution: Solution,
           aggregation: Optional[AggregationMap] = None, max_violations: int = 10_000) -> VerifyReport:
    """Check ``solution`` against original demands, or aggregated ones if ``aggregation`` is given."""
    demands = aggregation.demands if aggregation is not None else instance.demands
    E = instance.n_links
    B = instance.capacity
    lps = solution.lightpaths
    viol: List[Violation] = []

    def add(v: Violation) -> None:
        if len(viol) < max_violations:
            viol.append(v)

    # lightpaths: structure, reach, wavelength assignment
    good = {}
    occupied: Dict[tuple, int] = {}
    for l in sorted(lps):
        lp = lps[l]
        ok = True
        if not 0 <= lp.wavelength < instance.wavelengths:
            add(Violation(LIGHTPATH, lightpath=l, detail=f"wavelength {lp.wavelength} out of range"))
            ok = False
        if not lp.links or any(not 0 <= e < E for e in lp.links) or len(set(lp.links)) != len(lp.links):
            add(Violation(LIGHTPATH, lightpath=l, detail="invalid or repeated link ids"))
            continue
        try:
            nodes = path_nodes(lp.links, instance)
        except StructureError as exc:
            add(Violation(LIGHTPATH, lightpath=l, detail=str(exc)))
            continue
        if len(set(nodes)) != len(nodes):
            add(Violation(LIGHTPATH, lightpath=l, detail="lightpath revisits a node"))
            ok = False
        if tuple(lp.nodes) not in (nodes, nodes[::-1]):
            add(Violation(LIGHTPATH, lightpath=l, detail="node sequence does not match links"))
            ok = False
        length = sum(instance.links[e].length for e in lp.links)
        if length > instance.reach:
            add(Violation(REACH, lightpath=l, detail=f"length {length} > {instance.reach}"))
        for e in lp.links:
            key = (lp.wavelength, e)
            if key in occupied:
                add(Violation(WAVELENGTH, lightpath=l,
                              detail=f"wavelength {lp.wavelength} on link {e} also used by lightpath {occupied[key]}"))
            else:
                occupied[key] = l
        if ok:
            good[l] = lp
    lmask = {l: sum(1 << e for e in set(lp.links)) for l, lp in lps.items()
             if all(0 <= e < E for e in lp.links)}

    def mask(route: Route) -> int:
        m = 0
        for l in route:
            m |= lmask.get(l, 0)
        return m

    def route_ok(k, route, scen, elementary=False) -> bool:
        if any(l not in good for l in route):
            add(Violation(ROUTE, k.id, scen, detail=f"route {route} uses an unknown or invalid lightpath"))
            return False
        # routes are undirected: accept a walk from either terminal
        seq = None
        for a, b in ((k.s, k.t), (k.t, k.s)):
            try:
                walk = route_nodes(route, good, start=a)
            except StructureError:
                continue
            if walk[-1] == b:
                seq = walk
                break
        if seq is None:
            add(Violation(ROUTE, k.id, scen, detail=f"route {route} does not connect {k.s} and {k.t}"))
            return False
        if elementary and len(set(seq)) != len(seq):
            add(Violation(ELEMENTARY, k.id, scen, detail="working route revisits a node"))
        return True

    # per-demand route records
    by_link: List[List[int]] = [[] for _ in range(E)]
    usable = {}
    base: Dict[int, int] = {}
    for k in demands:
        tree = solution.trees.get(k.id)
        if tree is None or not tree.working:
            add(Violation(COVERAGE, k.id, (None, None), detail="no working route"))
            continue
        if not route_ok(k, tree.working, (None, None), elementary=True):
            continue
        wm = mask(tree.working)
        fine = True
        for e1, r in sorted(tree.level1.items()):
            if not wm >> e1 & 1:
                add(Violation(CONSISTENCY, k.id, (e1, None),
                              detail="explicit level-1 route although the working route survives"))
                fine = False
            if not route_ok(k, r, (e1, None)):
                fine = False
            elif mask(r) >> e1 & 1:
                add(Violation(FAILED_LINK, k.id, (e1, None), detail=f"route traverses failed link {e1}"))
        for e1 in range(E):
            if wm >> e1 & 1 and e1 not in tree.level1:
                add(Violation(COVERAGE, k.id, (e1, None), detail="missing level-1 route"))
                fine = False
        for (e1, e2), r in sorted(tree.level2.items()):
            if e1 == e2 or not (0 <= e1 < E and 0 <= e2 < E):
                add(Violation(ROUTE, k.id, (e1, e2), detail="invalid scenario"))
                fine = False
                continue
            if wm >> e1 & 1:
                parent = tree.level1.get(e1)
                needed = parent is not None and mask(parent) >> e2 & 1
            else:
                needed = bool(wm >> e2 & 1)
            if not needed:
                add(Violation(CONSISTENCY, k.id, (e1, e2),
                              detail="explicit level-2 route although the parent route survives"))
                fine = False
            if not route_ok(k, r, (e1, e2)):
                fine = False
        for e in range(E):
            if wm >> e & 1:
                by_link[e].append(k.id)
        for l in set(tree.working):
            base[l] = base.get(l, 0) + k.volume
        if fine:
            usable[k.id] = tree

    # working scenario capacity
    peak = 0
    for l, c in base.items():
        peak = max(peak, c)
        if c > B:
            add(Violation(CAPACITY, scenario=(None, None), lightpath=l, detail=f"load {c} > {B}"))

    dem = {k.id: k for k in demands}
    work_sets = {kid: set(solution.trees[kid].working) for kid in usable}
    checked = 1

    def scenario_load(scen: Scenario, kids) -> None:
        nonlocal peak
        failed = 0
        for e in scen.failed:
            failed |= 1 << e
        extra: Dict[int, int] = {}
        key = (scen.first, scen.second)
        for kid in kids:
            tree = usable.get(kid)
            if tree is None:
                continue
            try:
                r = resolve_route(tree, scen, good)
            except StructureError as exc:
                add(Violation(COVERAGE, kid, key, detail=str(exc)))
                continue
            if mask(r) & failed:
                add(Violation(FAILED_LINK, kid, key, detail=f"route {r} traverses a failed link"))
            ws = work_sets[kid]
            for l in set(r):
                if l not in ws:
                    extra[l] = extra.get(l, 0) + dem[kid].volume
        for l, x in extra.items():
            c = base.get(l, 0) + x
            peak = max(peak, c)
            if c > B:
                add(Violation(CAPACITY, scenario=key, lightpath=l, detail=f"load {c} > {B}"))

    for e1 in range(E):
        scenario_load(Scenario(e1), by_link[e1])
        checked += 1
    for e1 in range(E):
        s1 = set(by_link[e1])
        for e2 in range(E):
            if e1 == e2:
                continue
            kids = sorted(s1.union(by_link[e2]))
            scenario_load(Scenario(e1, e2), kids)
            checked += 1

    stats = {
        "scenarios_checked": checked,
        "scenarios_total": sum(scenario_universe(E)),
        "demands": len(demands),
        "max_utilization": peak / B if B else 0.0,
    }
    return VerifyReport(not viol, objective(solution), viol, stats)
