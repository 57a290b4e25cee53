import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graybox import build_recombination_graph, build_vig, generate_nkq
from graybox.chordal import (Graph, NotChordalError, articulation_points, assign_subfunctions,
                             build_clique_tree, chordalize, connected_components, fill_in,
                             is_chordal, maximum_cardinality_search)
from graybox.landscape import Vig, as_solution
from oracles import (articulation_brute, components_union_find, has_chordless_cycle,
                     is_junction_tree, maximal_cliques_brute, on_common_cycle)
from conftest import BLUE, RED, APX_EDGES, example_landscape


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    p = draw(st.floats(0.05, 0.7))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return n, edges


def component_graph():
    rg = build_recombination_graph(build_vig(example_landscape()), as_solution(RED),
                                   as_solution(BLUE))
    comp = {3, 7, 8, 12, 13, 15}
    return Graph.from_edges(sorted(comp), [e for e in rg.edges() if e[0] in comp])


def test_example_recombination_graph():
    rg = build_recombination_graph(build_vig(example_landscape()), as_solution(RED),
                                   as_solution(BLUE))
    assert set(rg.differing) == set(range(18)) - {4, 6, 10, 14, 17}
    assert rg.component_sets() == [{0, 1, 2, 5}, {3, 7, 8, 12, 13, 15}, {9, 11, 16}]
    assert {rg.nodes[a] for a in rg.articulation} == {1, 2, 3}
    assert rg.q == 3 and rg.h == 13


def test_equal_parents_give_empty_graph():
    vig = build_vig(example_landscape())
    z = as_solution(BLUE)
    rg = build_recombination_graph(vig, z, z)
    assert rg.h == 0 and rg.q == 0 and not rg.articulation


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_components_match_union_find(seed):
    rng = np.random.default_rng(seed)
    land = generate_nkq(30, 2, 8, seed)
    vig = build_vig(land)
    x = rng.integers(0, 2, 30, dtype=np.uint8)
    y = rng.integers(0, 2, 30, dtype=np.uint8)
    rg = build_recombination_graph(vig, x, y)
    diff = set(np.flatnonzero(x != y).tolist())
    edges = [(u, v) for u, v in vig.edges() if u in diff and v in diff]
    assert sorted(map(tuple, map(sorted, rg.component_sets()))) == \
        sorted(tuple(sorted(c)) for c in components_union_find(diff, edges))
    assert set(rg.edges()) == set(edges)


@settings(max_examples=150, deadline=None)
@given(graphs(max_n=12))
def test_articulation_points_match_brute_force(g):
    n, edges = g
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    assert articulation_points(adj) == articulation_brute(n, edges)


def test_mcs_example_numbering():
    g = component_graph()
    gamma = maximum_cardinality_search(g, priority=[12, 7, 15, 13, 3, 8])
    assert gamma == {12: 6, 7: 5, 15: 4, 13: 3, 3: 2, 8: 1}
    # pinning only the start keeps the lowest-index tie rule afterwards
    gamma = maximum_cardinality_search(g, priority=[12])
    assert gamma[12] == 6 and gamma[7] == 5 and sorted(gamma.values()) == list(range(1, 7))


def test_mcs_defaults():
    assert maximum_cardinality_search(Graph.from_edges([5], [])) == {5: 1}
    g = Graph.from_edges([0, 1, 2], [(0, 1), (1, 2)])
    assert maximum_cardinality_search(g) == {0: 3, 1: 2, 2: 1}


def test_fill_in_on_four_cycle():
    g = Graph.from_edges([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3), (3, 0)])
    cg = chordalize(g)
    assert len(cg.fillin_edges) == 1
    assert cg.fillin_edges[0] in {(0, 2), (1, 3)}
    assert is_chordal(cg.as_graph())


def test_example_components_are_chordal():
    rg = build_recombination_graph(build_vig(example_landscape()), as_solution(RED),
                                   as_solution(BLUE))
    assert chordalize(rg).fillin_edges == ()


def test_interval_graphs_need_no_fill():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(2, 15))
        a = rng.integers(0, 20, n)
        b = a + rng.integers(0, 6, n)
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if max(a[i], a[j]) <= min(b[i], b[j])]
        assert chordalize(Graph.from_edges(range(n), edges), rng=rng).fillin_edges == ()


@settings(max_examples=150, deadline=None)
@given(graphs(max_n=11), st.booleans())
def test_chordalization_properties(g, randomized):
    n, edges = g
    G = Graph.from_edges(range(n), edges)
    rng = np.random.default_rng(n) if randomized else None
    cg = chordalize(G, rng=rng)
    H = cg.as_graph()
    assert not has_chordless_cycle(n, H.edges())
    assert chordalize(H).fillin_edges == ()
    for u, v in cg.fillin_edges:
        assert on_common_cycle(n, edges, u, v)
    assert articulation_points(G.adj) <= articulation_points(H.adj)


def test_clique_tree_example():
    g = component_graph()
    tree = build_clique_tree(g, priority=[12])
    got = [(set(c.clique), set(c.separator), set(c.residue), c.parent) for c in tree.cliques]
    assert got == [({7, 12, 13, 15}, set(), {7, 12, 13, 15}, None),
                   ({3, 7, 13}, {7, 13}, {3}, 0),
                   ({3, 8}, {3}, {8}, 1)]
    assert tree.postorder() == [2, 1, 0]


def test_clique_tree_small_graph():
    g = Graph.from_edges(range(1, 7), APX_EDGES)
    tree = build_clique_tree(g, priority=[4, 5, 6])
    assert [set(c.clique) for c in tree.cliques][0] == {4, 5, 6}
    shape = {frozenset(c.clique): (set(c.separator), c.parent) for c in tree.cliques}
    assert shape == {frozenset({4, 5, 6}): (set(), None), frozenset({3, 6}): ({6}, 0),
                     frozenset({2, 5}): ({5}, 0), frozenset({1, 4}): ({4}, 0)}


def test_edgeless_graph_gives_singleton_roots():
    tree = build_clique_tree(Graph.from_edges([2, 4, 9], []))
    assert [c.clique for c in tree.cliques] == [(2,), (4,), (9,)]
    assert tree.roots == [0, 1, 2]


def test_non_chordal_input_is_rejected():
    g = Graph.from_edges(range(4), [(0, 1), (1, 2), (2, 3), (3, 0)])
    with pytest.raises(NotChordalError):
        build_clique_tree(g)


@settings(max_examples=150, deadline=None)
@given(graphs(max_n=10), st.integers(0, 3))
def test_clique_tree_invariants(g, seed):
    n, edges = g
    rng = np.random.default_rng(seed) if seed else None
    cg = chordalize(Graph.from_edges(range(n), edges), rng=rng)
    tree = build_clique_tree(cg, rng=rng)
    cliques = [set(c.clique) for c in tree.cliques]
    parents = [c.parent for c in tree.cliques]
    assert len(cliques) <= n
    assert sorted(map(sorted, cliques)) == sorted(map(sorted, maximal_cliques_brute(n, cg.as_graph().edges())))
    assert is_junction_tree(cliques, parents)
    residues = [v for c in tree.cliques for v in c.residue]
    assert sorted(residues) == list(range(n))
    for c in tree.cliques:
        assert set(c.separator) | set(c.residue) == set(c.clique)
        assert not set(c.separator) & set(c.residue)
        if c.parent is None:
            assert c.separator == ()
        else:
            assert c.parent < c.index
            assert set(c.separator) == set(c.clique) & cliques[c.parent]
    assert len(tree.roots) == len(connected_components(cg.adj))


def test_assignment_worked_example():
    land = example_landscape()
    rg = build_recombination_graph(build_vig(land), as_solution(RED), as_solution(BLUE))
    tree = build_clique_tree(chordalize(rg))
    assigned = assign_subfunctions(land, tree, rg.differing)
    where = {l: i for i, ls in enumerate(assigned) for l in ls}
    c13 = tree.cliques[where[13]]
    assert set(c13.clique) == {7, 12, 13, 15}
    # f_0(0, 6, 14) has differing set {0}; f_10(10, 2, 17) only {2}; f_14(14, 4, 16) only {16}
    assert all(l in where for l in (0, 10, 14))
    diff = set(rg.differing)
    touching = [l for l, sf in enumerate(land.subfunctions) if set(sf.vars) & diff]
    assert sorted(where) == touching


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 30))
def test_assignment_counts_and_minimality(seed, n):
    rng = np.random.default_rng(seed)
    land = generate_nkq(n, min(3, n - 1), 8, seed)
    x = rng.integers(0, 2, n, dtype=np.uint8)
    y = x ^ (rng.random(n) < 0.5).astype(np.uint8)
    rg = build_recombination_graph(build_vig(land), x, y)
    tree = build_clique_tree(chordalize(rg))
    assigned = assign_subfunctions(land, tree, rg.differing)
    diff = set(rg.differing)
    expected = [l for l, sf in enumerate(land.subfunctions) if set(sf.vars) & diff]
    got = sorted(l for ls in assigned for l in ls)
    assert got == expected
    for i, ls in enumerate(assigned):
        for l in ls:
            vd = set(land.subfunctions[l].vars) & diff
            assert vd <= set(tree.cliques[i].clique)
            sizes = [len(c.clique) for c in tree.cliques if vd <= set(c.clique)]
            assert len(tree.cliques[i].clique) == min(sizes)


def test_assignment_skips_common_only_subfunctions():
    land = example_landscape()
    x = as_solution(RED)
    y = x.copy()
    y[0] = 1
    rg = build_recombination_graph(build_vig(land), x, y)
    tree = build_clique_tree(chordalize(rg))
    assigned = assign_subfunctions(land, tree, rg.differing)
    assert sorted(l for ls in assigned for l in ls) == [0, 1]
