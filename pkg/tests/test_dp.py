import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graybox import (MkLandscape, Subfunction, build_recombination_graph, build_vig, dpx,
                     evaluate, generate_nkq)
from graybox.chordal import (Graph, assign_subfunctions, build_clique_tree, chordalize)
from graybox.dp import BudgetExceeded, dp_offspring, plan_exploration
from graybox.landscape import as_solution
from oracles import dynastic_max
from conftest import BLUE, APX_EDGES, RED, example_landscape


def _pipeline(land, x, y, beta, priority=None, budget=1 << 26):
    rg = build_recombination_graph(build_vig(land), x, y)
    tree = build_clique_tree(chordalize(rg, priority), priority)
    assigned = assign_subfunctions(land, tree, rg.differing)
    plan = plan_exploration(tree, rg.articulation, beta, rg.differing)
    return rg, tree, assigned, plan, dp_offspring(land, tree, assigned, plan, x, y, budget)


def random_landscape(rng, n, m, kmax, clauses=False):
    subs = []
    for _ in range(m):
        k = int(rng.integers(1, min(kmax, n) + 1))
        vs = rng.choice(n, size=k, replace=False).tolist()
        if clauses and rng.random() < 0.5:
            subs.append(Subfunction.clause([v if rng.random() < .5 else ~v for v in vs],
                                           int(rng.integers(0, 9))))
        else:
            subs.append(Subfunction.from_table(vs, rng.integers(-20, 50, 1 << k)))
    return MkLandscape(n, subs)


def test_small_graph_plan_beta1():
    g = Graph.from_edges(range(1, 7), APX_EDGES)
    tree = build_clique_tree(g, priority=[4, 5, 6])
    plan = plan_exploration(tree, {4, 5, 6}, beta=1)
    classes = sorted(map(sorted, plan.final_classes()))
    assert classes == [[1], [2], [3], [4], [5, 6]]
    assert plan.log2_explored == 5 and not plan.full_dynastic


def test_example_plan_beta2():
    land = example_landscape()
    x, y = as_solution(RED), as_solution(BLUE)
    rg = build_recombination_graph(build_vig(land), x, y)
    sub = {3, 7, 8, 12, 13, 15}
    g = Graph.from_edges(sorted(sub), [e for e in rg.edges() if e[0] in sub])
    tree = build_clique_tree(g, priority=[12])
    plan = plan_exploration(tree, set(), beta=2)
    c1 = plan.cliques[0]
    assert c1.s_units == [] and len(c1.r_units) == 3
    assert [sorted(c1.r_vars[u].tolist()) for u in c1.r_units] == [[7], [12], [13, 15]]
    assert c1.n_configs == 8
    # cliques 2 and 3 have |S|,|R| <= 2 and stay fully explored
    for i in (1, 2):
        cp = plan.cliques[i]
        assert all(len(u) == 1 for u in cp.s_units + cp.r_units)


def test_large_beta_gives_singletons():
    land = example_landscape()
    rg, tree, _, plan, _ = _pipeline(land, as_solution(RED), as_solution(BLUE), 18)
    assert plan.full_dynastic and plan.log2_explored == rg.h


@pytest.mark.parametrize("length", [3, 4, 7, 20])
def test_path_costs_four_per_edge(length):
    subs = [Subfunction.from_table((i, i + 1), [3, 1, 4, 1 + i]) for i in range(length - 1)]
    land = MkLandscape(length, subs)
    x = np.zeros(length, dtype=np.uint8)
    for beta in (1, 2, 5):
        *_, res = _pipeline(land, x, 1 - x, beta)
        assert res.evaluations == 4 * (length - 1)


def test_equal_parents():
    land = example_landscape()
    z = as_solution(BLUE)
    rep = dpx(land, build_vig(land), z, z, 2)
    assert np.array_equal(rep.offspring, z) and rep.fitness == evaluate(land, z)
    assert rep.log2_explored == 0 and rep.full_dynastic


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 14), st.booleans())
def test_full_dp_matches_dynastic_oracle(seed, n, clauses):
    rng = np.random.default_rng(seed)
    land = random_landscape(rng, n, int(rng.integers(1, 2 * n)), 4, clauses)
    x = rng.integers(0, 2, n, dtype=np.uint8)
    y = rng.integers(0, 2, n, dtype=np.uint8)
    rg, tree, assigned, plan, res = _pipeline(land, x, y, n)
    assert plan.full_dynastic
    z = res.offspring
    assert ((z == x) | (z == y)).all()
    assert evaluate(land, z) == dynastic_max(land, x, y)
    const = sum(land.subfunctions[l].value(x[list(land.subfunctions[l].vars)])
                for l in range(land.m) if l not in {l for ls in assigned for l in ls})
    assert res.best_value + const == evaluate(land, z)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_restricted_dp_optimises_over_its_classes(seed, beta):
    # with classes fixed, the DP optimum equals brute force over class-constant choices
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 15))
    land = random_landscape(rng, n, 2 * n, 4)
    x = rng.integers(0, 2, n, dtype=np.uint8)
    y = rng.integers(0, 2, n, dtype=np.uint8)
    rg, tree, assigned, plan, res = _pipeline(land, x, y, beta)
    classes = [sorted(c) for c in plan.final_classes()]
    assert plan.log2_explored == len(classes)
    best = None
    for mask in range(1 << len(classes)):
        z = x.copy()
        for b, cls in enumerate(classes):
            if mask >> b & 1:
                z[cls] = y[cls]
        f = evaluate(land, z)
        best = f if best is None else max(best, f)
    assert evaluate(land, res.offspring) == best
    for cp in plan.cliques:
        assert len(cp.s_units) <= beta + 1 and len(cp.r_units) <= beta + 1


def test_budget_exceeded():
    land = generate_nkq(40, 3, 16, 1)
    x = np.zeros(40, dtype=np.uint8)
    with pytest.raises(BudgetExceeded):
        _pipeline(land, x, 1 - x, 40, budget=8)
    with pytest.raises(BudgetExceeded):
        dpx(land, build_vig(land), x, 1 - x, 40, budget=8)


def test_table_sizes_bounded():
    land = generate_nkq(200, 3, 64, 2)
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, 200, dtype=np.uint8)
    for beta in range(4):
        *_, plan, res = _pipeline(land, x, 1 - x, beta)
        for t in res.tables:
            assert t.values.shape[0] <= 1 << (beta + 1)
