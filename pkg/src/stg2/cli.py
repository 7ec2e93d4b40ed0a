"""Command-line entry points: solve, verify, generate, bench.

Exit codes: 0 ok/feasible, 2 infeasible, 3 timeout, 4 input error.
"""
from __future__ import annotations

import argparse
import logging
import resource
import sys
import time
from pathlib import Path
from typing import List, Optional

from .instance_io import (DEFAULT_VOLUMES, FormatError, GeneratorConfig, generate_instance,
                          parse_instance, read_solution, serialize_instance, write_solution)
from .lbag import CostParams
from .parallel import solve_parallel
from .planner import Infeasible, Planner, SolverParams, SolveTimeout
from .verifier import verify

EXIT_OK, EXIT_INFEASIBLE, EXIT_TIMEOUT, EXIT_INPUT = 0, 2, 3, 4

log = logging.getLogger("stg2")


def _kv(key, value) -> str:
    if isinstance(value, float):
        return f"{key}={value:.4f}"
    return f"{key}={value}"


def solver_params(args) -> SolverParams:
    return SolverParams(
        cost=CostParams(args.alpha, args.beta, args.gamma, args.theta),
        threads=args.threads, pool_size=args.pool_size, nf=args.nf, nr=args.nr,
        cs=args.cs, cr=args.cr, max_pops=args.max_pops, time_limit=args.time_limit)


def run_solver(instance, params: SolverParams):
    """Master/slave planning; one thread runs the same loop inline."""
    pl = Planner(instance, params)
    return solve_parallel(instance, planner=pl), pl


def _load_instance(path: str):
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def cmd_solve(args) -> int:
    try:
        inst = _load_instance(args.instance)
        params = solver_params(args)
    except (OSError, FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        sol, pl = run_solver(inst, params)
    except Infeasible as exc:
        e = exc.scenario
        print(_kv("status", "infeasible"))
        print(_kv("blocked_demand", exc.demand))
        print(f"blocked_scenario=({e.first if e.first is not None else 0},{e.second if e.second is not None else 0})")
        return EXIT_INFEASIBLE
    except SolveTimeout as exc:
        print(_kv("status", "timeout"))
        print(_kv("detail", str(exc)))
        return EXIT_TIMEOUT
    st = pl.stats
    if args.out:
        Path(args.out).write_text(write_solution(sol), encoding="utf-8")
    print(_kv("status", "ok"))
    for key in ("objective", "aggregated_demands", "searches", "label_pops", "explicit_level1",
                "explicit_level2", "level2_scenarios", "time_working", "time_level1", "time_level2",
                "time_total"):
        print(_kv(key, getattr(st, key)))
    print(_kv("lightpaths", len(sol.lightpaths)))
    print(_kv("reuse_rate", st.reuse_rate))
    for it in st.iterations:
        print("iteration " + " ".join(_kv(k, v) for k, v in it.items()))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        inst = _load_instance(args.instance)
        sol = read_solution(Path(args.solution).read_text(encoding="utf-8"), inst)
    except (OSError, FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = verify(inst, sol)
    for line in report.lines(args.max_violations):
        print(line)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def generator_config(args, seed: Optional[int] = None) -> GeneratorConfig:
    kw = dict(seed=args.seed if seed is None else seed, nodes=args.nodes, links=args.links,
              demands=args.demands, reach=args.reach, wavelengths=args.wavelengths,
              capacity=args.capacity)
    if args.volumes:
        kw["volumes"] = tuple(args.volumes)
        kw["volume_weights"] = tuple(args.volume_weights or [1] * len(args.volumes))
    return GeneratorConfig(**kw)


def cmd_generate(args) -> int:
    try:
        inst = generate_instance(generator_config(args))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = serialize_instance(inst)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if not inst.meta.get("three_edge_connected", False):
        print("warning: generated topology is not 3-edge-connected", file=sys.stderr)
    return EXIT_OK


def bench_rows(instances, thread_counts: List[int], base: SolverParams, check: bool = True):
    """One row per (instance, M): objective, total time, level-2 time, verifier status."""
    rows = []
    for name, inst in instances:
        for m in thread_counts:
            p = SolverParams(**{**base.__dict__, "threads": m})
            t0 = time.perf_counter()
            try:
                sol, pl = run_solver(inst, p)
            except (Infeasible, SolveTimeout) as exc:
                rows.append(dict(instance=name, M=m, objective=-1, time=time.perf_counter() - t0,
                                 time2=float("nan"), feasible=0, status=type(exc).__name__))
                continue
            ok = verify(inst, sol).feasible if check else True
            rows.append(dict(instance=name, M=m, objective=pl.stats.objective, time=pl.stats.time_total,
                             time2=pl.stats.time_level2, feasible=int(ok), status="ok"))
    return rows


def cmd_bench(args) -> int:
    try:
        params = solver_params(args)
        instances = [(f"seed{s}", generate_instance(generator_config(args, s)))
                     for s in range(args.seed, args.seed + args.instances)]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rows = bench_rows(instances, args.thread_counts, params, check=not args.no_verify)
    print(f"{'instance':>10} {'M':>3} {'obj':>6} {'time':>9} {'time2':>9} {'clean':>5}")
    for r in rows:
        print(f"{r['instance']:>10} {r['M']:>3} {r['objective']:>6} {r['time']:>9.2f} {r['time2']:>9.2f} {r['feasible']:>5}")
    base = {r["instance"]: r for r in rows if r["M"] == args.thread_counts[0]}
    for r in rows:
        b = base.get(r["instance"])
        if b and r["M"] != b["M"] and r["time2"] > 0:
            print(f"speedup instance={r['instance']} M={r['M']} level2={b['time2'] / r['time2']:.3f}")
    print(_kv("peak_rss_mb", resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024))
    return EXIT_OK if all(r["feasible"] for r in rows) else EXIT_INFEASIBLE


def _solver_flags(p: argparse.ArgumentParser) -> None:
    d = SolverParams()
    c = CostParams()
    p.add_argument("--alpha", type=float, default=c.alpha)
    p.add_argument("--beta", type=float, default=c.beta)
    p.add_argument("--gamma", type=float, default=c.gamma)
    p.add_argument("--theta", type=float, default=c.theta)
    p.add_argument("--threads", type=int, default=d.threads, help="slave threads M")
    p.add_argument("--pool-size", type=int, default=d.pool_size, help="scenario pool limit NS")
    p.add_argument("--nf", type=int, default=d.nf, help="blocked-scenario stop threshold")
    p.add_argument("--nr", type=int, default=d.nr, help="new-route stop threshold")
    p.add_argument("--cs", type=int, default=d.cs, help="scenarios between stop checks")
    p.add_argument("--cr", type=int, default=d.cr, help="routes between counter flushes")
    p.add_argument("--max-pops", type=int, default=d.max_pops, help="label-pop guard per search")
    p.add_argument("--time-limit", type=float, default=None, help="seconds")


def _generator_flags(p: argparse.ArgumentParser) -> None:
    g = GeneratorConfig()
    p.add_argument("--seed", type=int, default=g.seed)
    p.add_argument("--nodes", type=int, default=g.nodes)
    p.add_argument("--links", type=int, default=g.links)
    p.add_argument("--demands", type=int, default=g.demands)
    p.add_argument("--wavelengths", type=int, default=g.wavelengths)
    p.add_argument("--capacity", type=int, default=g.capacity)
    p.add_argument("--reach", type=int, default=g.reach)
    p.add_argument("--volumes", type=int, nargs="+", default=None,
                   help=f"volume choices (default {' '.join(map(str, DEFAULT_VOLUMES))})")
    p.add_argument("--volume-weights", type=int, nargs="+", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stg2", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="plan an instance")
    p.add_argument("instance")
    p.add_argument("--out", help="write the .stg2sol solution here")
    p.add_argument("--seed", type=int, default=0, help="unused by the solver; kept for scripting")
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a solution against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--max-violations", type=int, default=50)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="write a seeded random instance")
    _generator_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="solve seeded instances with several thread counts")
    _generator_flags(p)
    _solver_flags(p)
    p.add_argument("--instances", type=int, default=3)
    p.add_argument("--thread-counts", type=int, nargs="+", default=[1, 2, 4, 8])
    p.add_argument("--no-verify", action="store_true")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
