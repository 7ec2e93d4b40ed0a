import pytest
from hypothesis import given, settings, strategies as st

from stg2 import parallel
from stg2.instance_io import write_solution
from stg2.parallel import (FrozenStateViolation, ParallelParams, SharedFlags, assign_pools, master_plan,
                           slave_plan, solve_parallel)
from stg2.planner import Infeasible, Planner, SolverParams
from stg2.verifier import verify

from conftest import small_instance


def test_assign_pools_examples():
    assert assign_pools(10, 3, 10) == [[1, 4, 7, 10], [2, 5, 8], [3, 6, 9]]
    assert assign_pools(10, 3, 2) == [[1, 4], [2, 5], [3, 6]]
    assert assign_pools(2, 4, 5) == [[1], [2], [], []]
    assert assign_pools(0, 2, 5) == [[], []]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 200), st.integers(1, 8), st.integers(1, 50))
def test_pools_disjoint_and_bounded(n, M, NS):
    pools = assign_pools(n, M, NS)
    flat = [i for p in pools for i in p]
    assert len(flat) == len(set(flat)) == min(n, M * NS)
    assert all(len(p) <= NS and all(1 <= i <= n for i in p) for p in pools)


def test_shared_flags_thresholds():
    pp = ParallelParams(M=2, NF=2, NR=5)
    f = SharedFlags()
    assert not f.should_stop(pp)
    f.add_fail()
    assert not f.should_stop(pp)
    f.add_fail()
    assert f.should_stop(pp)
    f.reset()
    f.add_routes(5)
    assert f.should_stop(pp)
    f.reset()
    f.set_idle()
    assert f.should_stop(pp)
    with pytest.raises(ValueError):
        ParallelParams(M=0)


def level2_ready(seed):
    pl = Planner(small_instance(seed))
    pl.plan_working()
    pl.plan_level1()
    pl.ledger.begin_level2()
    return pl


def test_idle_flag_stops_slave_after_cs_scenarios():
    pl = level2_ready(5)
    todo = pl.level2_order()
    flags = SharedFlags()
    flags.set_idle()
    out = slave_plan(pl, todo, flags, ParallelParams(CS=3))
    handled = len(out.planned) + len(out.blocked)
    assert 1 <= handled <= 3 + len(out.blocked)


def test_blocked_scenarios_finished_by_master():
    pl = level2_ready(3)
    todo = pl.level2_order()
    n_lp = len(pl.lbag.lightpaths)
    out = slave_plan(pl, todo, SharedFlags(), ParallelParams(NF=10 ** 6, NR=10 ** 6))
    assert len(pl.lbag.lightpaths) == n_lp
    assert out.blocked and len(out.planned) + len(out.blocked) == len(todo)
    for rec in out.blocked:
        assert rec.pending
        # snapshot holds exactly the loads committed before blocking
        assert all(v > 0 for v in rec.snapshot.values())
    for key, routes in out.planned:
        for kid, r in routes.items():
            pl.trees[kid].level2[key] = r
    added = master_plan(pl, out.blocked)
    assert added == len(pl.lbag.lightpaths) - n_lp
    assert verify(pl.instance, pl.solution()).feasible


@pytest.mark.parametrize("M", [1, 2, 4, 8])
def test_thread_counts_verifier_clean(M):
    inst = small_instance(4, nodes=12, links=20, demands=30)
    pl = Planner(inst, SolverParams(threads=M, pool_size=40, cs=4, cr=4))
    sol = solve_parallel(inst, planner=pl)
    assert verify(inst, sol).feasible
    its = pl.stats.iterations
    assert all(it["lightpaths_constant"] for it in its)
    assert all(it["planned"] + it["blocked"] >= 1 for it in its)
    assert sum(it["planned"] + it["blocked"] for it in its) == pl.stats.level2_scenarios


def test_frozen_violation_detected(monkeypatch):
    inst = small_instance(4)
    real = parallel.slave_plan

    def leaky(pl, pool, flags, pp):
        pl.pool.add((0, 0), (10 ** 6,))
        return real(pl, pool, flags, pp)

    monkeypatch.setattr(parallel, "slave_plan", leaky)
    with pytest.raises(FrozenStateViolation):
        solve_parallel(inst, SolverParams(threads=2))


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10_000))
def test_single_thread_deterministic(seed):
    inst = small_instance(seed)
    try:
        a = write_solution(solve_parallel(inst))
    except Infeasible:
        return
    assert write_solution(solve_parallel(inst)) == a
