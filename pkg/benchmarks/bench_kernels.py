"""Compare the numba kernels with the pure numpy fallback.

Each backend runs in its own interpreter because the choice is made at import
time from GRAYBOX_NUMBA.  Usage: python benchmarks/bench_kernels.py [--n 2000]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from graybox import BACKEND, build_vig, dpx, generate_nkq
from graybox.landscape import evaluate_many
from graybox.search import hill_climb, perturb

n, reps = int(sys.argv[1]), int(sys.argv[2])
land = generate_nkq(n, 2, 64, 1)
vig = build_vig(land)
rng = np.random.default_rng(0)
Z = rng.integers(0, 2, (64, n), dtype=np.uint8)

def best_of(fn):
    fn()  # warm-up (JIT compilation or page-in)
    out = []
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return min(out) * 1e3

x, _ = hill_climb(land, vig, Z[0], rng)
y, _ = hill_climb(land, vig, perturb(x, 0.05, rng), rng)
res = {
    "backend": BACKEND,
    "evaluate 64 rows": best_of(lambda: evaluate_many(land, Z)),
    "hill climb from random": best_of(lambda: hill_climb(land, vig, Z[1], np.random.default_rng(1))),
    "hill climb after 5% perturbation": best_of(
        lambda: hill_climb(land, vig, perturb(x, 0.05, np.random.default_rng(2)), rng)),
    "dpx beta=2": best_of(lambda: dpx(land, vig, x, y, 2)),
}
print(json.dumps(res))
"""


def run(flag, n, reps):
    env = dict(os.environ, GRAYBOX_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", WORKER, str(n), str(reps)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()
    fast, slow = run("1", args.n, args.reps), run("0", args.n, args.reps)
    print(f"NKQ n={args.n} K=2, best of {args.reps} (ms)")
    print(f"{'kernel':36s} {fast['backend']:>10s} {slow['backend']:>10s} {'speedup':>8s}")
    for k in fast:
        if k == "backend":
            continue
        print(f"{k:36s} {fast[k]:10.2f} {slow[k]:10.2f} {slow[k] / fast[k]:8.1f}x")


if __name__ == "__main__":
    main()
