"""Solve seeded desk-scale instances; report objective, time and, for failures, the exhausted cut.

Usage: python3 scripts/desk_sweep.py [first_seed] [count] [threads]
"""
import sys
import time

import networkx as nx

from stg2.instance_io import GeneratorConfig, generate_instance
from stg2.parallel import solve_parallel
from stg2.planner import Infeasible, Planner, SolverParams
from stg2.verifier import verify


def diagnose(inst, pl, exc):
    """Components of the graph of non-failed links that still have a free wavelength."""
    failed = set(exc.scenario.failed)
    g = nx.Graph()
    g.add_nodes_from(range(inst.n_nodes))
    g.add_edges_from((ln.a, ln.b) for ln in inst.links if pl.lbag.free[ln.id] and ln.id not in failed)
    sizes = sorted(len(c) for c in nx.connected_components(g))
    k = next(d for d in pl.demands if d.id == exc.demand)
    side = nx.node_connected_component(g, k.s)
    cut = [ln.id for ln in inst.links if (ln.a in side) != (ln.b in side)]
    return f"free-wavelength components {sizes}, cut links {cut}, failed {sorted(failed)}"


def main(argv):
    first = int(argv[1]) if len(argv) > 1 else 1
    count = int(argv[2]) if len(argv) > 2 else 50
    threads = int(argv[3]) if len(argv) > 3 else 1
    ok = 0
    for seed in range(first, first + count):
        inst = generate_instance(GeneratorConfig(seed=seed))
        pl = Planner(inst, SolverParams(threads=threads))
        t = time.perf_counter()
        try:
            sol = solve_parallel(inst, planner=pl)
        except Infeasible as exc:
            print(f"seed={seed} status=infeasible time={time.perf_counter() - t:.1f} "
                  f"lightpaths={len(pl.lbag.lightpaths)} {exc}; {diagnose(inst, pl, exc)}", flush=True)
            continue
        rep = verify(inst, sol)
        ok += rep.feasible
        s = pl.stats
        print(f"seed={seed} status=ok clean={int(rep.feasible)} objective={s.objective} time={s.time_total:.1f} "
              f"time2={s.time_level2:.1f} reuse={s.reuse_rate:.3f}", flush=True)
    print(f"clean={ok}/{count}")


if __name__ == "__main__":
    main(sys.argv)
