"""First-fit-decreasing aggregation of demands sharing a terminal pair."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .model import Demand
from .solution import RoutingTree, Solution


@dataclass(frozen=True)
class Aggregate:
    demand: Demand
    members: Tuple[int, ...]


@dataclass
class AggregationMap:
    aggregates: List[Aggregate]

    @property
    def demands(self) -> List[Demand]:
        return [a.demand for a in self.aggregates]

    def origin_of(self) -> Dict[int, int]:
        """Original demand id -> aggregate id."""
        return {m: a.demand.id for a in self.aggregates for m in a.members}


def first_fit_decreasing(items: Sequence[Tuple[int, int]], capacity: int) -> List[List[Tuple[int, int]]]:
    """Pack ``(id, weight)`` items; ties on weight go by ascending id."""
    order = sorted(items, key=lambda it: (-it[1], it[0]))
    bins: List[List[Tuple[int, int]]] = []
    free: List[int] = []
    for it in order:
        for i, room in enumerate(free):
            if it[1] <= room:
                bins[i].append(it)
                free[i] -= it[1]
                break
        else:
            bins.append([it])
            free.append(capacity - it[1])
    return bins


def aggregate_demands(demands: Sequence[Demand], capacity: int) -> AggregationMap:
    groups: Dict[Tuple[int, int], List[Demand]] = {}
    for d in demands:
        if d.volume > capacity:
            raise ValueError(f"demand {d.id} volume {d.volume} exceeds capacity {capacity}")
        groups.setdefault(d.pair, []).append(d)
    by_id = {d.id: d for d in demands}
    out: List[Aggregate] = []
    for pair in sorted(groups):
        bins = first_fit_decreasing([(d.id, d.volume) for d in groups[pair]], capacity)
        for b in bins:
            lead = by_id[b[0][0]]
            members = tuple(i for i, _ in b)
            agg = Demand(len(out), lead.s, lead.t, sum(w for _, w in b), members)
            out.append(Aggregate(agg, members))
    return AggregationMap(out)


def identity_map(demands: Sequence[Demand]) -> AggregationMap:
    return AggregationMap([Aggregate(Demand(i, d.s, d.t, d.volume, (d.id,)), (d.id,))
                           for i, d in enumerate(demands)])


def expand_solution(solution: Solution, amap: AggregationMap) -> Solution:
    """Give every original demand its aggregate's routing tree."""
    trees = {}
    for agg in amap.aggregates:
        tree = solution.trees.get(agg.demand.id)
        if tree is None or not tree.working:
            raise ValueError(f"aggregate {agg.demand.id} has no route")
        for m in agg.members:
            trees[m] = RoutingTree(tree.working, dict(tree.level1), dict(tree.level2))
    return Solution(dict(solution.lightpaths), dict(sorted(trees.items())))
