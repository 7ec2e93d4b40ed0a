"""Routing trees and solutions (explicit routes only; inherited routes are implicit)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

from .model import Lightpath, Scenario, StructureError, route_links

Route = Tuple[int, ...]


@dataclass
class RoutingTree:
    working: Route = ()
    level1: Dict[int, Route] = field(default_factory=dict)
    level2: Dict[Tuple[int, int], Route] = field(default_factory=dict)


@dataclass
class Solution:
    lightpaths: Dict[int, Lightpath] = field(default_factory=dict)
    trees: Dict[int, RoutingTree] = field(default_factory=dict)

    @property
    def objective(self) -> int:
        return len(self.lightpaths)


def resolve_route(tree: RoutingTree, scenario: Scenario,
                  lightpaths: Dict[int, Lightpath]) -> Route:
    """Route a demand uses in ``scenario`` under consistent routing."""
    e1, e2 = scenario.first, scenario.second
    if e1 is None:
        return tree.working
    work_links = route_links(tree.working, lightpaths)
    if e2 is None:
        if e1 in tree.level1:
            return tree.level1[e1]
        if e1 not in work_links:
            return tree.working
        raise StructureError(f"no route for level-1 scenario ({e1}, 0)")
    if (e1, e2) in tree.level2:
        return tree.level2[(e1, e2)]
    if e1 in work_links:
        r1 = tree.level1.get(e1)
        if r1 is not None and e2 not in route_links(r1, lightpaths):
            return r1
    elif e2 not in work_links:
        return tree.working
    raise StructureError(f"no route for level-2 scenario ({e1}, {e2})")
