import pytest
from hypothesis import given, strategies as st

from stg2.model import (WORKING, Demand, Link, NetworkInstance, Scenario, StructureError,
                        iter_scenarios, make_lightpath, path_nodes, route_avoids, route_is_elementary,
                        route_links, route_nodes, scenario_universe)

from conftest import A, AB, AC, AD, B, BC, C, CD, CE, D, DE, E


@given(st.integers(1, 100))
def test_scenario_universe_counts(n):
    assert scenario_universe(n) == (1, n, n * n - n)
    assert sum(1 for _ in iter_scenarios(n)) == sum(scenario_universe(n))


def test_scenario_universe_example():
    assert scenario_universe(8) == (1, 8, 56)
    assert sum(scenario_universe(8)) == 65
    with pytest.raises(ValueError):
        scenario_universe(0)


@given(st.integers(2, 30).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n * n))))
def test_scenario_index_roundtrip(arg):
    n, idx = arg
    if idx == 0:
        assert Scenario.from_index(0, n) == WORKING
        return
    try:
        s = Scenario.from_index(idx, n)
    except ValueError:
        # diagonal slots (e, e) are not scenarios
        e = idx - 1 - n
        assert e >= 0 and e // n == e % n
        return
    assert s.index(n) == idx


def test_scenario_levels():
    assert WORKING.level == 0 and WORKING.failed == ()
    assert Scenario(3).level == 1 and Scenario(3).failed == (3,)
    assert Scenario(3, 1).level == 2 and Scenario(3, 1).failed == (3, 1)
    with pytest.raises(ValueError):
        Scenario(2, 2)
    with pytest.raises(ValueError):
        Scenario(None, 1)


def test_instance_validation_rejects_bad_input():
    links = [Link(0, 0, 1, 10)]
    with pytest.raises(ValueError):
        NetworkInstance(2, [Link(0, 0, 0, 10)], 2, 100, 100)
    with pytest.raises(ValueError):
        NetworkInstance(2, [Link(0, 0, 1, 0)], 2, 100, 100)
    with pytest.raises(ValueError):
        NetworkInstance(2, links, 2, 100, 100, [Demand(0, 0, 1, 120)])
    with pytest.raises(ValueError):
        NetworkInstance(2, [Link(1, 0, 1, 10)], 2, 100, 100)


def test_parallel_links_allowed():
    inst = NetworkInstance(2, [Link(0, 0, 1, 10), Link(1, 0, 1, 12)], 2, 100, 100)
    assert inst.n_links == 2


def test_path_nodes_and_lightpath(fig2):
    assert path_nodes([AD, CD], fig2) == (A, D, C)
    assert path_nodes([CD, AD], fig2) == (C, D, A)
    assert path_nodes([AC], fig2) == (A, C)
    lp = make_lightpath(3, 0, [AD, CD], fig2)
    assert lp.endpoints == (A, C) and lp.length == 200
    assert lp.nodes_from(C) == (C, D, A)
    with pytest.raises(StructureError):
        path_nodes([AC, DE], fig2)
    with pytest.raises(StructureError):
        make_lightpath(0, 0, [AC, AC], fig2)
    with pytest.raises(StructureError):
        make_lightpath(0, 2, [AC], fig2)          # wavelength out of range
    with pytest.raises(StructureError):
        make_lightpath(0, 0, [AD, DE], fig2)      # 350 > reach 300
    with pytest.raises(StructureError):
        make_lightpath(0, 0, [AC, CD, AD], fig2)  # returns to A


def _fig2_lps(inst):
    lps = [make_lightpath(0, 0, [AC], inst), make_lightpath(1, 0, [CE], inst),
           make_lightpath(2, 0, [AD, CD], inst), make_lightpath(3, 1, [CD, DE], inst)]
    return {lp.id: lp for lp in lps}


def test_route_helpers(fig2):
    lps = _fig2_lps(fig2)
    assert route_nodes((0, 1), lps) == (A, C, E)
    assert route_nodes((2, 3), lps, start=A) == (A, D, C, D, E)
    assert route_links((2, 3), lps) == {AD, CD, DE}
    assert route_is_elementary((0, 1), lps)
    # (l3, l4) passes D twice, like r6 in the example
    assert not route_is_elementary((2, 3), lps)
    assert route_avoids((2, 3), lps, Scenario(AC, CE))
    assert not route_avoids((0, 1), lps, Scenario(AC, CE))
    with pytest.raises(StructureError):
        route_nodes((0, 0), lps)
    with pytest.raises(StructureError):
        route_nodes((1, 2), lps, start=A)
    with pytest.raises(StructureError):
        route_nodes((9,), lps)


def test_demand_pair_is_unordered():
    assert Demand(0, 4, 1, 10).pair == (1, 4) == Demand(1, 1, 4, 10).pair
