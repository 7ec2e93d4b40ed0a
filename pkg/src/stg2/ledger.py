"""Bandwidth accounting.

``Ledger`` keeps the working consumption per lightpath plus two sparse maps:
``delta`` (level-1 increments keyed by lightpath and first failed link) and
``over`` (bandwidth reserved at level 1 that a level-2 scenario does not use).
Level-2 consumption only exists inside a short-lived ``Level2View``.

``DirectLedger`` stores every scenario densely and is used as a test oracle.
"""
from __future__ import annotations

import threading
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .model import Scenario

WORKING, LEVEL1, LEVEL2 = 0, 1, 2


class ContractViolation(RuntimeError):
    """Ledger used out of the working -> level-1 -> level-2 order."""


class CapacityOverflow(RuntimeError):
    pass


class Ledger:
    def __init__(self, capacity: int, n_links: int, trace: Optional[list] = None):
        self.capacity = capacity
        self.n_links = n_links
        self.c00: Dict[int, int] = {}
        self.delta: Dict[int, int] = {}   # key l * E + e1
        self.over: Dict[int, int] = {}    # key l * E * E + e1 * E + e2
        self.y00: Dict[int, int] = {}     # lightpath -> bitset over demand ids
        self.phase = WORKING
        self.trace = trace
        self._open: set = set()
        self._lock = threading.Lock()

    # -- phases -------------------------------------------------------------
    def begin_level1(self) -> None:
        if self.phase != WORKING:
            raise ContractViolation("level-1 phase already started")
        self.phase = LEVEL1
        if self.trace is not None:
            self.trace.append(("phase", LEVEL1))

    def begin_level2(self) -> None:
        if self.phase != LEVEL1:
            raise ContractViolation("level-2 phase requires a completed level-1 phase")
        self.phase = LEVEL2
        if self.trace is not None:
            self.trace.append(("phase", LEVEL2))

    # -- queries ------------------------------------------------------------
    def uses(self, k: int, l: int) -> bool:
        return bool(self.y00.get(l, 0) >> k & 1)

    def working_load(self, l: int) -> int:
        return self.c00.get(l, 0)

    def level1_load(self, l: int, e1: int) -> int:
        return self.c00.get(l, 0) + self.delta.get(l * self.n_links + e1, 0)

    def level2_base(self, l: int, e1: int, e2: int) -> int:
        E = self.n_links
        return (self.c00.get(l, 0) + self.delta.get(l * E + e1, 0)
                - self.over.get(l * E * E + e1 * E + e2, 0))

    def check_capacity(self, k: int, b: int, l: int, scenario: Scenario) -> bool:
        level = scenario.level
        if level == WORKING:
            if self.phase != WORKING:
                raise ContractViolation("working check after the working phase")
            load = self.c00.get(l, 0)
            ok = load + b <= self.capacity
        elif level == LEVEL1:
            if self.phase != LEVEL1:
                raise ContractViolation("level-1 check outside the level-1 phase")
            load = self.level1_load(l, scenario.first)
            ok = load + (0 if self.uses(k, l) else b) <= self.capacity
        else:
            raise ContractViolation("level-2 checks go through a Level2View")
        if self.trace is not None:
            self.trace.append(("query", l, scenario.index(self.n_links), load))
        return ok

    # -- commits ------------------------------------------------------------
    def commit_working(self, k: int, b: int, lps: Sequence[int]) -> None:
        if self.phase != WORKING:
            raise ContractViolation("working commit after the working phase")
        for l in lps:
            c = self.c00.get(l, 0) + b
            if c > self.capacity:
                raise CapacityOverflow(f"lightpath {l}: {c} > {self.capacity}")
            self.c00[l] = c
            self.y00[l] = self.y00.get(l, 0) | (1 << k)
        if self.trace is not None:
            self.trace.append(("working", k, b, tuple(lps)))

    def commit_level1(self, k: int, b: int, e1: int, lps: Sequence[int],
                      route_links: Iterable[int], working_links: Iterable[int]) -> None:
        if self.phase != LEVEL1:
            raise ContractViolation("level-1 commit outside the level-1 phase")
        if e1 not in set(working_links):
            raise ContractViolation(f"link {e1} is not on the working route of demand {k}")
        E = self.n_links
        rl = sorted(set(route_links))
        if e1 in rl:
            raise ContractViolation(f"level-1 route traverses failed link {e1}")
        for l in lps:
            inc = 0 if self.uses(k, l) else b
            if not inc:
                continue
            key = l * E + e1
            c = self.c00.get(l, 0) + self.delta.get(key, 0) + inc
            if c > self.capacity:
                raise CapacityOverflow(f"lightpath {l} at ({e1},0): {c} > {self.capacity}")
            self.delta[key] = self.delta.get(key, 0) + inc
            base = l * E * E + e1 * E
            for e2 in rl:
                self.over[base + e2] = self.over.get(base + e2, 0) + inc
        if self.trace is not None:
            self.trace.append(("level1", k, b, e1, tuple(lps), tuple(rl)))

    def open_level2(self, e1: int, e2: int, snapshot: Optional[Dict[int, int]] = None) -> "Level2View":
        if self.phase != LEVEL2:
            raise ContractViolation("level-2 view before the level-2 phase")
        key = (e1, e2)
        with self._lock:
            if key in self._open:
                raise ContractViolation(f"level-2 view ({e1},{e2}) already open")
            self._open.add(key)
        return Level2View(self, e1, e2, snapshot)

    def private_view(self, e1: int, e2: int) -> "Level2View":
        """Unregistered view for a slave thread; touches no ledger state."""
        if self.phase != LEVEL2:
            raise ContractViolation("level-2 view before the level-2 phase")
        return Level2View(self, e1, e2, registered=False)

    def _close(self, key) -> None:
        with self._lock:
            self._open.discard(key)

    def n_entries(self) -> int:
        return len(self.c00) + len(self.delta) + len(self.over)

    def fingerprint(self) -> Tuple[int, int, int, int]:
        return (len(self.c00), len(self.delta), len(self.over),
                hash((tuple(self.c00.items()), tuple(self.delta.items()), tuple(self.over.items()))))


class Level2View:
    """Consumption of one level-2 scenario, owned by a single planner thread."""

    def __init__(self, base: Ledger, e1: int, e2: int, snapshot: Optional[Dict[int, int]] = None,
                 registered: bool = True):
        self.base = base
        self.registered = registered
        self.e1, self.e2 = e1, e2
        self.scenario = Scenario(e1, e2)
        self.snapshot = snapshot
        self.extra: Dict[int, int] = {}
        self.closed = False

    def load(self, l: int) -> int:
        if self.snapshot is not None:
            c = self.snapshot.get(l, 0)
        else:
            c = self.base.level2_base(l, self.e1, self.e2)
        return c + self.extra.get(l, 0)

    def check(self, k: int, b: int, l: int) -> bool:
        load = self.load(l)
        base = self.base
        if base.trace is not None and self.registered:
            base.trace.append(("query", l, self.scenario.index(base.n_links), load))
        return load + (0 if base.uses(k, l) else b) <= base.capacity

    def commit(self, k: int, b: int, lps: Sequence[int]) -> None:
        if self.closed:
            raise ContractViolation("commit on a closed level-2 view")
        base = self.base
        for l in lps:
            inc = 0 if base.uses(k, l) else b
            if not inc:
                continue
            c = self.load(l) + inc
            if c > base.capacity:
                raise CapacityOverflow(f"lightpath {l} at ({self.e1},{self.e2}): {c} > {base.capacity}")
            self.extra[l] = self.extra.get(l, 0) + inc
        if base.trace is not None and self.registered:
            base.trace.append(("level2", k, b, self.e1, self.e2, tuple(lps)))

    def snapshot_loads(self, lightpath_ids: Iterable[int]) -> Dict[int, int]:
        out = {}
        for l in lightpath_ids:
            c = self.load(l)
            if c:
                out[l] = c
        return out

    def close(self) -> None:
        if not self.closed:
            self.closed = True
            self.extra = {}
            if self.registered:
                self.base._close((self.e1, self.e2))


class DirectLedger:
    """Dense C[l, scenario] updated by the direct (non-incremental) rules."""

    def __init__(self, capacity: int, n_links: int):
        self.capacity = capacity
        self.E = n_links
        self.n_scen = 1 + n_links + n_links * n_links
        self.C: Dict[int, np.ndarray] = {}
        self.y00: Dict[int, set] = {}
        mask = np.zeros(self.n_scen, dtype=bool)
        mask[: 1 + n_links] = True
        for e1 in range(n_links):
            for e2 in range(n_links):
                if e1 != e2:
                    mask[self.idx(e1, e2)] = True
        self.valid = mask

    def idx(self, e1: Optional[int] = None, e2: Optional[int] = None) -> int:
        return Scenario(e1, e2).index(self.E)

    def _row(self, l: int) -> np.ndarray:
        row = self.C.get(l)
        if row is None:
            row = self.C[l] = np.zeros(self.n_scen, dtype=np.int64)
        return row

    def value(self, l: int, scenario_index: int) -> int:
        row = self.C.get(l)
        return 0 if row is None else int(row[scenario_index])

    def _inc(self, k: int, b: int, l: int) -> int:
        return 0 if k in self.y00.get(l, ()) else b

    def commit_working(self, k: int, b: int, lps: Sequence[int]) -> None:
        for l in lps:
            self._row(l)[:] += b   # working scenario and every failure scenario
            self.y00.setdefault(l, set()).add(k)

    def commit_level1(self, k: int, b: int, e1: int, lps: Sequence[int], route_links: Iterable[int]) -> None:
        rl = set(route_links)
        for l in lps:
            inc = self._inc(k, b, l)
            row = self._row(l)
            row[self.idx(e1)] += inc
            for e2 in range(self.E):
                if e2 != e1 and e2 not in rl:
                    row[self.idx(e1, e2)] += inc

    def commit_level2(self, k: int, b: int, e1: int, e2: int, lps: Sequence[int]) -> None:
        for l in lps:
            self._row(l)[self.idx(e1, e2)] += self._inc(k, b, l)

    # full checks (no shortcut from the bandwidth relations)
    def check_working(self, k: int, b: int, l: int) -> bool:
        row = self.C.get(l)
        return row is None or int(row[self.valid].max()) + b <= self.capacity

    def check_level1(self, k: int, b: int, e1: int, l: int, route_links: Iterable[int]) -> bool:
        inc = self._inc(k, b, l)
        row = self.C.get(l)
        if row is None:
            return inc <= self.capacity
        rl = set(route_links)
        idxs = [self.idx(e1)] + [self.idx(e1, e2) for e2 in range(self.E) if e2 != e1 and e2 not in rl]
        return int(row[idxs].max()) + inc <= self.capacity

    def check_level2(self, k: int, b: int, e1: int, e2: int, l: int) -> bool:
        return self.value(l, self.idx(e1, e2)) + self._inc(k, b, l) <= self.capacity

    def lightpaths(self) -> List[int]:
        return sorted(self.C)
