import os
import subprocess
import sys

import numpy as np
import pytest

from graybox import _kernels, build_vig, generate_nkq, parse_maxsat


def _landscapes():
    yield generate_nkq(60, 3, 64, 1)
    rng = np.random.default_rng(0)
    lines = [f"p wcnf 30 90 100"]
    for _ in range(90):
        lits = rng.choice(30, 3, replace=False) + 1
        lits = lits * rng.choice([-1, 1], 3)
        lines.append(f"{rng.integers(1, 9)} " + " ".join(map(str, lits)) + " 0")
    yield parse_maxsat("\n".join(lines), "wcnf")


@pytest.mark.parametrize("land", list(_landscapes()), ids=["nkq", "wcnf"])
def test_numpy_and_loop_kernels_agree(land):
    la = land.arrays
    rng = np.random.default_rng(1)
    Z = rng.integers(0, 2, (5, land.n), dtype=np.uint8)
    np_vals = _kernels._values_np(Z, la.sub_ptr, la.sub_vars, la.sub_neg, la.sub_shift, la.kind,
                                  la.tab_ptr, la.tables, la.weights)
    for z, row in zip(Z, np_vals):
        loop = _kernels._values_loop(z, la.sub_ptr, la.sub_vars, la.sub_neg, la.kind, la.tab_ptr,
                                     la.tables, la.weights)
        assert (loop == row).all()
    cvars = rng.choice(land.n, 6, replace=False).astype(np.int64)
    flips = rng.integers(0, 2, (16, 6), dtype=np.uint8)
    subs = np.unique(np.concatenate([land.incident(v) for v in cvars]))
    a = _kernels._score_configs_np(Z[0], cvars, flips, subs, la.sub_ptr, la.sub_vars, la.sub_neg,
                                   la.sub_shift, la.kind, la.tab_ptr, la.tables, la.weights)
    b = _kernels._score_configs_loop(Z[0], cvars, flips, subs, la.sub_ptr, la.sub_vars,
                                     la.sub_neg, la.kind, la.tab_ptr, la.tables, la.weights)
    assert (a == b).all()
    vig = build_vig(land)
    perm = rng.permutation(land.n).astype(np.int64)
    z1, z2 = Z[1].copy(), Z[1].copy()
    m1 = _kernels._hill_climb_np(z1, perm, vig.indptr, vig.indices, la.var_ptr, la.var_subs,
                                 la.sub_ptr, la.sub_vars, la.sub_neg, la.sub_shift, la.kind,
                                 la.tab_ptr, la.tables, la.weights)
    m2 = _kernels._hill_climb_loop(z2, perm, vig.indptr, vig.indices, la.var_ptr, la.var_subs,
                                   la.sub_ptr, la.sub_vars, la.sub_neg, la.kind, la.tab_ptr,
                                   la.tables, la.weights)
    assert m1 == m2 and (z1 == z2).all()


def test_numpy_backend_selected_by_env(tmp_path):
    code = (
        "import numpy as np\n"
        "from graybox import BACKEND, build_vig, dpx, generate_nkq\n"
        "from graybox.search import DrilsConfig, drils\n"
        "land = generate_nkq(40, 2, 64, 3); vig = build_vig(land)\n"
        "r = drils(land, vig, DrilsConfig(alpha=0.1, time_limit=None, max_iterations=5))\n"
        "print(BACKEND, r.fitness, ''.join(map(str, r.best)))\n"
    )
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, GRAYBOX_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        outs[flag] = out
    assert outs["0"][0] == "numpy" and outs["1"][0] == "numba"
    assert outs["0"][1:] == outs["1"][1:]
