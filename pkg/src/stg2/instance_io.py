"""Line-oriented text formats (.stg2 instances, .stg2sol solutions) and a seeded generator.

Instance::

    STG2 <nodes> <links> <demands> <wavelengths> <capacity> <reach>
    LINK <id> <a> <b> <length>
    DEMAND <id> <s> <t> <volume>

Solution::

    SOLUTION <lightpaths> <demands>
    LP <id> <wavelength> <link ids...>
    WORK <k> <lightpath ids...>
    L1 <k> <e1> <lightpath ids...>
    L2 <k> <e1> <e2> <lightpath ids...>

Blank lines and ``#`` comments are ignored. All numbers are decimal integers.
"""
from __future__ import annotations

import heapq
import math
import random
from fractions import Fraction
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import networkx as nx

from .model import Demand, Link, NetworkInstance, StructureError, make_lightpath
from .solution import RoutingTree, Solution


class FormatError(ValueError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def _ints(no: int, toks: Sequence[str]) -> List[int]:
    try:
        return [int(x) for x in toks]
    except ValueError:
        raise FormatError(no, f"expected integers, got {' '.join(toks)!r}") from None


def parse_instance(text: str) -> NetworkInstance:
    it = iter(_lines(text))
    try:
        no, toks = next(it)
    except StopIteration:
        raise FormatError(0, "empty instance file") from None
    if toks[0] != "STG2" or len(toks) != 7:
        raise FormatError(no, "expected header 'STG2 nodes links demands wavelengths capacity reach'")
    n, m, nk, nw, cap, reach = _ints(no, toks[1:])
    links: List[Link] = []
    demands: List[Demand] = []
    for no, toks in it:
        kind, vals = toks[0], _ints(no, toks[1:])
        if kind == "LINK":
            if len(vals) != 4:
                raise FormatError(no, "LINK needs id a b length")
            i, a, b, length = vals
            if i != len(links):
                raise FormatError(no, f"link id {i} out of order (expected {len(links)})")
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise FormatError(no, f"link {i} has invalid endpoints {a} {b}")
            if length <= 0:
                raise FormatError(no, f"link {i} has non-positive length")
            links.append(Link(i, a, b, length))
        elif kind == "DEMAND":
            if len(vals) != 4:
                raise FormatError(no, "DEMAND needs id s t volume")
            i, s, t, vol = vals
            if i != len(demands):
                raise FormatError(no, f"demand id {i} out of order (expected {len(demands)})")
            if s == t or not (0 <= s < n and 0 <= t < n):
                raise FormatError(no, f"demand {i} has invalid terminals {s} {t}")
            if not 0 < vol <= cap:
                raise FormatError(no, f"demand {i} volume {vol} outside (0, {cap}]")
            demands.append(Demand(i, s, t, vol, (i,)))
        else:
            raise FormatError(no, f"unknown record {kind!r}")
    if len(links) != m or len(demands) != nk:
        raise FormatError(0, f"header announces {m} links / {nk} demands, "
                             f"file has {len(links)} / {len(demands)}")
    try:
        return NetworkInstance(n, links, nw, cap, reach, demands)
    except ValueError as exc:
        raise FormatError(0, str(exc)) from None


def serialize_instance(inst: NetworkInstance) -> str:
    out = [f"STG2 {inst.n_nodes} {inst.n_links} {len(inst.demands)} "
           f"{inst.wavelengths} {inst.capacity} {inst.reach}"]
    out += [f"LINK {ln.id} {ln.a} {ln.b} {ln.length}" for ln in inst.links]
    out += [f"DEMAND {d.id} {d.s} {d.t} {d.volume}" for d in inst.demands]
    return "\n".join(out) + "\n"


def write_solution(sol: Solution) -> str:
    out = [f"SOLUTION {len(sol.lightpaths)} {len(sol.trees)}"]
    for l in sorted(sol.lightpaths):
        lp = sol.lightpaths[l]
        out.append(f"LP {lp.id} {lp.wavelength} " + " ".join(map(str, lp.links)))
    for k in sorted(sol.trees):
        tree = sol.trees[k]
        out.append(f"WORK {k} " + " ".join(map(str, tree.working)))
        for e1 in sorted(tree.level1):
            out.append(f"L1 {k} {e1} " + " ".join(map(str, tree.level1[e1])))
        for e1, e2 in sorted(tree.level2):
            out.append(f"L2 {k} {e1} {e2} " + " ".join(map(str, tree.level2[(e1, e2)])))
    return "\n".join(out) + "\n"


def read_solution(text: str, instance: NetworkInstance, check_reach: bool = False) -> Solution:
    """Parse a solution; structure is validated, feasibility is left to the verifier."""
    it = iter(_lines(text))
    try:
        no, toks = next(it)
    except StopIteration:
        raise FormatError(0, "empty solution file") from None
    if toks[0] != "SOLUTION" or len(toks) != 3:
        raise FormatError(no, "expected header 'SOLUTION lightpaths demands'")
    n_lp, n_dem = _ints(no, toks[1:])
    sol = Solution()
    E = instance.n_links
    for no, toks in it:
        kind, vals = toks[0], _ints(no, toks[1:])
        if kind == "LP":
            if len(vals) < 3:
                raise FormatError(no, "LP needs id wavelength and at least one link")
            lid, w, links = vals[0], vals[1], vals[2:]
            if lid in sol.lightpaths:
                raise FormatError(no, f"duplicate lightpath id {lid}")
            if any(not 0 <= e < E for e in links):
                raise FormatError(no, f"lightpath {lid} references an unknown link")
            try:
                sol.lightpaths[lid] = make_lightpath(lid, w, links, instance, check_reach)
            except StructureError as exc:
                raise FormatError(no, str(exc)) from None
            continue
        if kind == "WORK":
            k, rest = vals[0], vals[1:]
        elif kind == "L1":
            k, rest = vals[0], vals[2:]
        elif kind == "L2":
            k, rest = vals[0], vals[3:]
        else:
            raise FormatError(no, f"unknown record {kind!r}")
        if not rest:
            raise FormatError(no, f"{kind} record for demand {k} has no lightpaths")
        for l in rest:
            if l not in sol.lightpaths:
                raise FormatError(no, f"unknown lightpath id {l}")
        if not 0 <= k < len(instance.demands):
            raise FormatError(no, f"unknown demand {k}")
        route = tuple(rest)
        tree = sol.trees.setdefault(k, RoutingTree())
        if kind == "WORK":
            if tree.working:
                raise FormatError(no, f"duplicate working route for demand {k}")
            tree.working = route
        elif kind == "L1":
            if vals[1] in tree.level1:
                raise FormatError(no, f"duplicate L1 record ({k}, {vals[1]})")
            tree.level1[vals[1]] = route
        else:
            key = (vals[1], vals[2])
            if key in tree.level2:
                raise FormatError(no, f"duplicate L2 record ({k}, {key})")
            tree.level2[key] = route
    if len(sol.lightpaths) != n_lp:
        raise FormatError(0, f"header announces {n_lp} lightpaths, file has {len(sol.lightpaths)}")
    if len(sol.trees) != n_dem:
        raise FormatError(0, f"header announces {n_dem} demands, file has {len(sol.trees)}")
    return sol


# -- generator --------------------------------------------------------------------

DEFAULT_VOLUMES = (10, 25, 40, 50, 75, 100)


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 1
    nodes: int = 50
    links: int = 100
    demands: int = 300
    volumes: Tuple[int, ...] = DEFAULT_VOLUMES
    # |Λ|=8 desk-scale networks only stay protectable with small demands
    volume_weights: Tuple[int, ...] = (1, 0, 0, 0, 0, 0)
    reach: int = 1500
    wavelengths: int = 8
    capacity: int = 100


def _dijkstra_all(n: int, adj, src: int) -> List[int]:
    dist = [math.inf] * n
    dist[src] = 0
    heap = [(0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _sparsest_cut_side(g: nx.Graph) -> set:
    n = g.number_of_nodes()
    nx.set_edge_attributes(g, 1, "capacity")
    tree = nx.gomory_hu_tree(g)
    best = None
    for u, v, data in sorted(tree.edges(data=True)):
        h = tree.copy()
        h.remove_edge(u, v)
        side = nx.node_connected_component(h, u)
        a = len(side)
        score = Fraction(data["weight"] - 2, a * (n - a))
        key = (score, min(side))
        if best is None or key < best[0]:
            best = (key, side)
    return best[1]


def generate_instance(cfg: GeneratorConfig) -> NetworkInstance:
    """Random geometric topology on a jittered integer grid, deterministic for a fixed seed.

    ``instance.meta['three_edge_connected']`` records whether every pair of nodes
    stays connected after any two link failures.
    """
    n, m = cfg.nodes, cfg.links
    if n < 4:
        raise ValueError("generator needs at least 4 nodes")
    if m < n - 1:
        raise ValueError(f"{m} links cannot connect {n} nodes")
    if 2 * m < 3 * n:
        raise ValueError(f"need at least 1.5 x nodes links ({(3 * n + 1) // 2}) for min degree 3")
    if m > n * (n - 1) // 2:
        raise ValueError("too many links for a simple graph")
    if len(cfg.volumes) != len(cfg.volume_weights) or any(v <= 0 or v > cfg.capacity for v in cfg.volumes) \
            or any(w < 0 for w in cfg.volume_weights) or not any(cfg.volume_weights):
        raise ValueError("invalid volume distribution")
    rng = random.Random(cfg.seed)
    # jittered grid: one node per cell of a near-square grid, random offset inside the cell
    cols = math.isqrt(n - 1) + 1
    cells = rng.sample(range(cols * cols), n)
    pos = [(r * 10 + rng.randrange(7), c * 10 + rng.randrange(7)) for r, c in (divmod(x, cols) for x in cells)]

    def d2(u, v):
        return (pos[u][0] - pos[v][0]) ** 2 + (pos[u][1] - pos[v][1]) ** 2

    pairs = sorted((d2(u, v), u, v) for u in range(n) for v in range(u + 1, n))
    # spanning tree (Kruskal on squared distances) keeps the graph connected
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = set()
    for _, u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            edges.add((u, v))
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    # lift every node to degree >= 3 using its nearest non-neighbours
    for u in rng.sample(range(n), n):
        near = sorted((d2(u, v), v) for v in range(n) if v != u)
        for _, v in near:
            if deg[u] >= 3 or len(edges) >= m:
                break
            e = (min(u, v), max(u, v))
            if e not in edges:
                edges.add(e)
                deg[u] += 1
                deg[v] += 1
    # close small cuts with the shortest crossing link while the budget allows
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    while len(edges) < m:
        cut = nx.minimum_edge_cut(g)
        if len(cut) >= 3:
            break
        h = g.copy()
        h.remove_edges_from(cut)
        side = nx.node_connected_component(h, next(iter(cut))[0])
        best = min((d, u, v) for d, u, v in pairs
                   if (u in side) != (v in side) and (u, v) not in edges)
        edges.add((best[1], best[2]))
        g.add_edge(best[1], best[2])
    # spend the rest of the budget on the sparsest cut: surviving capacity after
    # two failures (cut size - 2) relative to the number of node pairs it separates
    while len(edges) < m:
        side = _sparsest_cut_side(g)
        cand = [(d, u, v) for d, u, v in pairs if (u in side) != (v in side) and (u, v) not in edges][:3]
        _, u, v = cand[rng.randrange(len(cand))]
        edges.add((u, v))
        g.add_edge(u, v)
    edge_list = sorted(edges)
    raw = [max(1, math.isqrt(d2(u, v) * 100)) for u, v in edge_list]
    adj = [[] for _ in range(n)]
    for (u, v), w in zip(edge_list, raw):
        adj[u].append((v, w))
        adj[v].append((u, w))
    dists = []
    for u in range(n):
        du = _dijkstra_all(n, adj, u)
        dists.extend(du[v] for v in range(u + 1, n))
    dists.sort()
    median = dists[len(dists) // 2]
    # scale so the median shortest path is about half the reach
    links = [Link(i, u, v, max(1, (w * cfg.reach + median) // (2 * median)))
             for i, ((u, v), w) in enumerate(zip(edge_list, raw))]
    demands = []
    choices = [v for v, wgt in zip(cfg.volumes, cfg.volume_weights) for _ in range(wgt)]
    for i in range(cfg.demands):
        s = rng.randrange(n)
        t = rng.randrange(n - 1)
        if t >= s:
            t += 1
        demands.append(Demand(i, s, t, choices[rng.randrange(len(choices))], (i,)))
    inst = NetworkInstance(n, links, cfg.wavelengths, cfg.capacity, cfg.reach, demands)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edge_list)
    inst.meta["three_edge_connected"] = nx.edge_connectivity(g) >= 3
    inst.meta["seed"] = cfg.seed
    return inst


def fig2_instance() -> NetworkInstance:
    """Five-node, eight-link example network with two 50 G demands, nodes A..E = 0..4.

    Lengths are chosen so that, under the default costs and a reach of 300,
    the pieces A-D-E, A-B-E and C-B-E each need two lightpaths.
    """
    text = """\
# A=0 B=1 C=2 D=3 E=4
STG2 5 8 2 2 100 300
LINK 0 0 2 100   # AC
LINK 1 2 4 100   # CE
LINK 2 0 3 150   # AD
LINK 3 2 3 50    # CD
LINK 4 3 4 200   # DE
LINK 5 0 1 200   # AB
LINK 6 1 2 200   # BC
LINK 7 1 4 200   # BE
DEMAND 0 0 2 50  # (A, C)
DEMAND 1 0 4 50  # (A, E)
"""
    return parse_instance(text)
