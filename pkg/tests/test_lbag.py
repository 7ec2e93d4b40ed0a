import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from stg2.lbag import LOGICAL, PHYSICAL, RECEIVER, TRANSMITTER, CostParams, Lbag, WavelengthClash, min_hop_table
from stg2.model import StructureError, make_lightpath

from conftest import AB, AC, AD, CD, CE, DE, small_instance


def random_state(inst, rng, n_paths=12):
    """LBAG with random simple lightpaths on random free wavelengths."""
    lb = Lbag(inst)
    g = nx.Graph()
    for ln in inst.links:
        g.add_edge(ln.a, ln.b, id=ln.id)
    for _ in range(n_paths):
        s, t = rng.sample(range(inst.n_nodes), 2)
        nodes = nx.shortest_path(g, s, t) if rng.random() < 0.5 else next(nx.all_simple_paths(g, s, t, cutoff=6), None)
        if nodes is None:
            continue
        links = [g[u][v]["id"] for u, v in zip(nodes, nodes[1:])]
        common = lb.full_mask
        for e in links:
            common &= lb.free[e]
        ws = [w for w in range(inst.wavelengths) if common >> w & 1]
        if not ws:
            continue
        try:
            lb.new_lightpath(rng.choice(ws), links)
        except StructureError:
            pass  # over reach
    return lb


def lbag_distances(lb, params, chi, target):
    """Cheapest LBAG path cost from every node to ``target`` (plain Dijkstra)."""
    g = nx.DiGraph()
    g.add_nodes_from(range(lb.n_graph_nodes))
    for arc in lb.arcs():
        c = lb.arc_cost(arc, params, chi)
        if not g.has_edge(arc.tail, arc.head) or g[arc.tail][arc.head]["w"] > c:
            g.add_edge(arc.tail, arc.head, w=c)
    return nx.single_source_dijkstra_path_length(g.reverse(copy=False), target, weight="w")


def test_structure_counts(fig2):
    lb = Lbag(fig2)
    lb.new_lightpath(0, [AC])
    lb.new_lightpath(0, [AD, CD])
    counts = lb.arc_counts()
    assert counts == {PHYSICAL: 16, LOGICAL: 4, TRANSMITTER: 5, RECEIVER: 5}
    assert sum(1 for _ in lb.arcs()) == sum(counts.values())
    assert lb.n_graph_nodes == 10
    assert lb.free_wavelengths(CD) == [1]
    with pytest.raises(WavelengthClash):
        lb.add_lightpath(make_lightpath(9, 0, [CD, DE], fig2))


def test_costs_follow_table(fig2):
    lb = Lbag(fig2)
    p = CostParams()
    assert lb.physical_cost(CD, p) == 1.0
    lb.new_lightpath(0, [AD, CD])
    # half of two wavelengths used: 1 + 32 * 0.5**3
    assert lb.physical_cost(CD, p) == pytest.approx(5.0)
    assert lb.physical_cost(CD, p, frozenset({CD})) == pytest.approx(7.0)
    assert lb.logical_cost(0, p) == 2
    assert lb.logical_cost(0, p, frozenset({AD, AB})) == 4
    with pytest.raises(ValueError):
        CostParams(alpha=0)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000))
def test_min_hop_matches_bfs(seed):
    inst = small_instance(seed)
    h = min_hop_table(inst)
    g = nx.Graph((l.a, l.b) for l in inst.links)
    ref = dict(nx.all_pairs_shortest_path_length(g))
    for u in range(inst.n_nodes):
        for v in range(inst.n_nodes):
            assert h[u, v] == ref[u][v]


def check_bound(inst, lb, params, chi, t):
    h = min_hop_table(inst)
    n = inst.n_nodes
    dist = lbag_distances(lb, params, chi, n + t)
    for j in range(2 * n):
        if j in dist:
            assert h[j % n, t] <= dist[j] + 1e-9
    for arc in lb.arcs():
        c = lb.arc_cost(arc, params, chi)
        assert c - h[arc.tail % n, t] + h[arc.head % n, t] >= -1e-9


def test_lower_bound_on_fixture(fig2):
    lb = Lbag(fig2)
    lb.new_lightpath(0, [AC])
    lb.new_lightpath(0, [CE])
    lb.new_lightpath(0, [AD, CD])
    for t in range(5):
        check_bound(fig2, lb, CostParams(), frozenset({AC}), t)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 64), st.floats(0.01, 64), st.floats(0.01, 8))
def test_lower_bound_random_states(seed, alpha, beta, gamma):
    rng = random.Random(seed)
    inst = small_instance(seed % 97, wavelengths=4)
    lb = random_state(inst, rng)
    chi = frozenset(rng.sample(range(inst.n_links), 3))
    check_bound(inst, lb, CostParams(alpha, beta, gamma, 3.0), chi, rng.randrange(inst.n_nodes))
