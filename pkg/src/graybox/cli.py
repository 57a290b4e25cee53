"""Command-line harness: instance generation, crossover benchmarks and algorithm runs."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from .crossover import OPERATORS, apply_operator
from .dp import DEFAULT_BUDGET, BudgetExceeded
from .landscape import build_vig, digest, dumps_nkq, evaluate, generate_nkq, load_instance
from .search import (PRESET_FAMILIES, SELECTIONS, DrilsConfig, EaConfig, drils, drils_preset,
                     ea, ea_preset, idpx)

BENCH_COLUMNS = ["instance", "operator", "beta", "h", "runtime_ns", "qir", "log2_explored",
                 "full_dynastic", "fitness_x", "fitness_y", "fitness_z", "error"]
RUN_COLUMNS = ["instance", "algorithm", "operator", "beta", "run", "seed", "iterations",
               "runtime_ns", "best_fitness", "quality", "budget_errors", "status", "trajectory"]


def format_rational(q: Fraction | None) -> str:
    """Exact rational to a 12-significant-digit, locale-independent decimal string."""
    if q is None:
        return ""
    with localcontext() as ctx:
        ctx.prec = 12
        d = Decimal(q.numerator) / Decimal(q.denominator)
    return format(d, "f")


def _csv_list(text: str, conv=str) -> list:
    return [conv(t) for t in text.split(",") if t.strip()]


def make_pair(n: int, flips: int, rng: np.random.Generator):
    """Uniform random ``x`` and a ``y`` at Hamming distance exactly ``flips``."""
    x = rng.integers(0, 2, n, dtype=np.uint8)
    y = x.copy()
    y[rng.choice(n, size=flips, replace=False)] ^= 1
    return x, y


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    land = generate_nkq(args.n, args.K, args.Q, args.seed)
    Path(args.out).write_text(dumps_nkq(land))
    print(digest(land))
    return 0


# ---------------------------------------------------------------------------
# bench-crossover
# ---------------------------------------------------------------------------

_WORKER: dict = {}


def _load_cached(path: str):
    if _WORKER.get("path") != path:
        land = load_instance(path)
        _WORKER.update(path=path, land=land, vig=build_vig(land))
    return _WORKER["land"], _WORKER["vig"]


def _bench_task(task) -> list[list]:
    path, operators, beta, budget, seed, di, flips, pi = task
    land, vig = _load_cached(path)
    x, y = make_pair(land.n, flips, np.random.default_rng([seed, di, pi]))
    fx, fy = evaluate(land, x), evaluate(land, y)
    rows = []
    for oi, op in enumerate(operators):
        rng = np.random.default_rng([seed, di, pi, oi + 1])
        try:
            rep = apply_operator(op, land, vig, x, y, rng, beta=beta, fx=fx, fy=fy,
                                 budget=budget)
        except BudgetExceeded:
            rows.append([land.name, op, beta, flips, "", "", "", "", fx, fy, "", "budget"])
            continue
        rows.append([land.name, op, beta if op == "dpx" else "", rep.h, rep.elapsed_ns,
                     format_rational(rep.qir),
                     "" if rep.log2_explored is None else rep.log2_explored,
                     "" if rep.full_dynastic is None else int(rep.full_dynastic),
                     fx, fy, rep.fitness, ""])
    return rows


def cmd_bench_crossover(args) -> int:
    operators = _csv_list(args.operators)
    for op in operators:
        if op not in OPERATORS:
            raise SystemExit(f"unknown operator {op!r}; choose from {','.join(OPERATORS)}")
    fractions = _csv_list(args.hamming, float)
    if any(not 0 < f <= 1 for f in fractions) or args.pairs < 1:
        raise SystemExit("hamming fractions must lie in (0, 1] and pairs must be >= 1")
    land = load_instance(args.instance)
    tasks = []
    for di, frac in enumerate(fractions):
        flips = math.floor(frac * land.n + 0.5)
        for pi in range(args.pairs):
            tasks.append((str(args.instance), operators, args.beta, args.memory_budget,
                          args.seed, di, flips, pi))
    with _open_out(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_COLUMNS)
        for rows in _map(_bench_task, tasks, args.workers):
            writer.writerows(rows)
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _run_task(task) -> list:
    args, run, seed = task
    land, vig = _load_cached(str(args.instance))
    op = args.operator
    common = {"time_limit": args.time_limit, "max_iterations": args.max_iterations,
              "seed": seed, "budget": args.memory_budget}
    if args.algorithm == "drils":
        if args.preset:
            cfg = drils_preset(args.preset, op, **common)
        else:
            cfg = DrilsConfig(alpha=args.alpha, crossover=op, beta=args.beta, **common)
        if args.beta is not None:
            cfg.beta = args.beta
        res = drils(land, vig, cfg)
        beta = cfg.beta if op == "dpx" else ""
    elif args.algorithm == "ea":
        if args.preset:
            cfg = ea_preset(args.preset, op, **common)
        else:
            cfg = EaConfig(popsize=args.popsize, p_m=args.pm, selection=args.selection,
                           crossover=op, beta=args.beta, **common)
        if args.beta is not None:
            cfg.beta = args.beta
        res = ea(land, vig, cfg)
        beta = cfg.beta if op == "dpx" else ""
    else:
        op = "dpx"
        beta = args.beta if args.beta is not None else 2
        res = idpx(land, vig, beta, time_limit=args.time_limit, seed=seed,
                   max_iterations=args.max_iterations, budget=args.memory_budget)
    traj_path = ""
    if args.trajectory_dir:
        d = Path(args.trajectory_dir)
        d.mkdir(parents=True, exist_ok=True)
        traj_path = str(d / f"{land.name}-{args.algorithm}-{op}-run{run}.csv")
        res.trajectory.write_csv(traj_path)
    failed = res.best is None or (res.iterations > 0 and res.budget_errors >= res.iterations)
    quality = ""
    if args.fstar and res.fitness is not None:
        quality = format_rational(Fraction(res.fitness, args.fstar))
    return [land.name, args.algorithm, op, beta, run, seed, res.iterations, res.elapsed_ns,
            "" if res.fitness is None else res.fitness, quality, res.budget_errors,
            "failed" if failed else "ok", traj_path]


def cmd_run(args) -> int:
    if args.algorithm != "idpx" and args.preset is None:
        missing = [f for f, v in (("--alpha", args.alpha),) if v is None] \
            if args.algorithm == "drils" else \
            [f for f, v in (("--popsize", args.popsize), ("--pm", args.pm),
                            ("--selection", args.selection)) if v is None]
        if missing:
            raise SystemExit(f"{args.algorithm} needs {', '.join(missing)} or --preset")
        if args.beta is None:
            args.beta = 2
    tasks = [(args, r, args.seed + r) for r in range(args.runs)]
    with _open_out(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUN_COLUMNS)
        for row in _map(_run_task, tasks, args.workers):
            writer.writerow(row)
    return 0


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()


def _open_out(path):
    if path in (None, "-"):
        return _Stdout()
    return open(path, "w", newline="")


def _map(fn, tasks, workers: int):
    if workers <= 1:
        for t in tasks:
            yield fn(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers)))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graybox", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate instances")
    gsub = gen.add_subparsers(dest="kind", required=True)
    nkq = gsub.add_parser("nkq", help="random NKQ landscape")
    nkq.add_argument("--n", type=int, required=True)
    nkq.add_argument("--K", type=int, required=True)
    nkq.add_argument("--Q", type=int, default=64)
    nkq.add_argument("--seed", type=int, default=0)
    nkq.add_argument("--out", required=True)
    nkq.set_defaults(func=cmd_generate)

    def shared(sp):
        sp.add_argument("--instance", required=True, help=".nkq, .cnf or .wcnf file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--memory-budget", type=int, default=DEFAULT_BUDGET,
                        help="cap on total DP table entries per crossover")
        sp.add_argument("--out", default="-", help="CSV output path (default stdout)")
        sp.add_argument("--workers", type=int, default=1)

    bench = sub.add_parser("bench-crossover", help="apply operators to random parent pairs")
    shared(bench)
    bench.add_argument("--operators", default="px,apx,dpx")
    bench.add_argument("--beta", type=int, default=2)
    bench.add_argument("--hamming", default="0.01,0.02,0.04,0.08",
                       help="comma-separated distances as fractions of n")
    bench.add_argument("--pairs", type=int, default=1000)
    bench.set_defaults(func=cmd_bench_crossover)

    run = sub.add_parser("run", help="run a search algorithm")
    run.add_argument("algorithm", choices=("drils", "ea", "idpx"))
    shared(run)
    run.add_argument("--operator", default="dpx", choices=OPERATORS)
    run.add_argument("--beta", type=int, default=None)
    run.add_argument("--preset", choices=PRESET_FAMILIES,
                     help="tuned parameters for an instance family")
    run.add_argument("--alpha", type=float, help="DRILS perturbation factor")
    run.add_argument("--popsize", type=int)
    run.add_argument("--pm", type=float, help="EA mutation probability")
    run.add_argument("--selection", choices=SELECTIONS)
    run.add_argument("--runs", type=int, default=10)
    run.add_argument("--time-limit", type=float, default=60.0, help="seconds per run")
    run.add_argument("--max-iterations", type=int, default=None,
                     help="iteration cap; makes runs reproducible independent of speed")
    run.add_argument("--fstar", type=int, default=None, help="reference fitness for q = f/f*")
    run.add_argument("--trajectory-dir", default=None)
    run.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
