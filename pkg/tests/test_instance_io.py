import pytest
from hypothesis import given, settings, strategies as st

from stg2.instance_io import (FormatError, GeneratorConfig, fig2_instance, generate_instance, parse_instance,
                              read_solution, serialize_instance, write_solution)
from stg2.model import make_lightpath, scenario_universe
from stg2.planner import solve
from stg2.solution import RoutingTree, Solution

from conftest import AC, AD, CD, CE, DE, small_instance


def test_fig2_fixture_shape(fig2):
    assert (fig2.n_nodes, fig2.n_links, len(fig2.demands)) == (5, 8, 2)
    assert fig2.wavelengths == 2 and fig2.capacity == 100
    assert scenario_universe(fig2.n_links) == (1, 8, 56)
    assert [d.volume for d in fig2.demands] == [50, 50]


def test_instance_roundtrip_byte_exact(fig2):
    text = serialize_instance(fig2)
    again = parse_instance(text)
    assert again == fig2
    assert serialize_instance(again) == text


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_generated_instance_roundtrip(seed):
    inst = small_instance(seed)
    text = serialize_instance(inst)
    assert serialize_instance(parse_instance(text)) == text


def test_comments_and_blank_lines_ignored(fig2):
    text = "# header comment\n\n" + serialize_instance(fig2).replace("\n", "  # trailing\n", 1)
    assert parse_instance(text) == fig2


def test_empty_demand_list_gives_empty_solution():
    inst = parse_instance("STG2 3 3 0 2 100 500\nLINK 0 0 1 10\nLINK 1 1 2 10\nLINK 2 0 2 10\n")
    sol = solve(inst)
    assert sol.lightpaths == {} and sol.trees == {}
    assert write_solution(sol) == "SOLUTION 0 0\n"


@pytest.mark.parametrize("text, lineno, fragment", [
    ("STG2 2 1 1 2 100 500\nLINK 0 0 1 10\nDEMAND 0 0 1 120\n", 3, "volume 120"),
    ("STG2 2 1 0 2 100 500\nLINK 0 0 0 10\n", 2, "endpoints"),
    ("STG2 2 1 0 2 100 500\nLINK 0 0 1 x\n", 2, "integers"),
    ("STG2 2 1 0 2 100 500\nLINK 1 0 1 10\n", 2, "out of order"),
    ("STG2 2 1 0 2 100 500\nLINK 0 0 1 10\nFOO 1\n", 3, "unknown record"),
    ("STG2 2 2 0 2 100 500\nLINK 0 0 1 10\n", 0, "header announces"),
    ("GRAPH 2 1\n", 1, "header"),
])
def test_parse_errors_carry_line_numbers(text, lineno, fragment):
    with pytest.raises(FormatError) as info:
        parse_instance(text)
    assert info.value.lineno == lineno
    assert fragment in str(info.value)


def _fig3_solution(inst):
    # l1=AC, l2=CE, l3=(AD,CD) on the first wavelength, l4=(CD,DE) on the second
    lps = {i: make_lightpath(i, w, links, inst)
           for i, (w, links) in enumerate([(0, [AC]), (0, [CE]), (0, [AD, CD]), (1, [CD, DE])])}
    trees = {0: RoutingTree((0,), {AC: (2,)}, {}),
             1: RoutingTree((0, 1), {AC: (2, 1), CE: (0, 3)}, {(AC, CE): (2, 3)})}
    return Solution(lps, trees)


def test_solution_roundtrip_fig3(fig2):
    sol = _fig3_solution(fig2)
    text = write_solution(sol)
    assert "L2 1 0 1 2 3" in text
    back = read_solution(text, fig2)
    assert write_solution(back) == text
    assert back.trees[1].level2[(AC, CE)] == (2, 3)
    assert back.lightpaths[3].wavelength == 1


def test_read_solution_rejects_dangling_and_duplicates(fig2):
    text = write_solution(_fig3_solution(fig2))
    with pytest.raises(FormatError, match="unknown lightpath id 99"):
        read_solution(text.replace("WORK 0 0", "WORK 0 99"), fig2)
    dup = text.replace("LP 1 0 1\n", "LP 1 0 1\nLP 1 0 1\n").replace("SOLUTION 4", "SOLUTION 5")
    with pytest.raises(FormatError, match="duplicate lightpath"):
        read_solution(dup, fig2)
    with pytest.raises(FormatError, match="header announces"):
        read_solution(text.replace("SOLUTION 4", "SOLUTION 5"), fig2)


def test_generator_deterministic_and_seed_sensitive():
    a = serialize_instance(generate_instance(GeneratorConfig(seed=1)))
    b = serialize_instance(generate_instance(GeneratorConfig(seed=1)))
    c = serialize_instance(generate_instance(GeneratorConfig(seed=2)))
    assert a == b
    links_a = [l for l in a.splitlines() if l.startswith("LINK")]
    links_c = [l for l in c.splitlines() if l.startswith("LINK")]
    assert links_a != links_c


def test_generator_shape_and_flags():
    inst = generate_instance(GeneratorConfig(seed=3))
    assert (inst.n_nodes, inst.n_links, len(inst.demands)) == (50, 100, 300)
    assert inst.wavelengths == 8 and inst.capacity == 100
    assert inst.meta["three_edge_connected"] is True
    assert all(l.length <= inst.reach for l in inst.links)


@pytest.mark.parametrize("kw", [dict(nodes=5, links=3), dict(nodes=3, links=6), dict(nodes=10, links=12),
                                dict(volumes=(10, 120), volume_weights=(1, 1)),
                                dict(volume_weights=(0, 0, 0, 0, 0, 0))])
def test_generator_rejects_bad_configs(kw):
    with pytest.raises(ValueError):
        generate_instance(GeneratorConfig(**kw))


def test_fig2_constructor_is_stable():
    assert serialize_instance(fig2_instance()) == serialize_instance(fig2_instance())
