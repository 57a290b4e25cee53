"""Recombination graphs, chordal completion and clique trees.

Graphs here are small, sparse and rebuilt for every crossover, so they are
plain Python adjacency lists over *local* node ids ``0..h-1``; ``nodes[i]`` is
the variable behind local id ``i`` and local order follows variable order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .landscape import MkLandscape, Vig


@dataclass(frozen=True)
class Graph:
    nodes: tuple[int, ...]
    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, nodes: Sequence[int], edges) -> "Graph":
        nodes = tuple(sorted(int(v) for v in nodes))
        local = {v: i for i, v in enumerate(nodes)}
        adj = [set() for _ in nodes]
        for u, v in edges:
            if u != v:
                adj[local[u]].add(local[v])
                adj[local[v]].add(local[u])
        return cls(nodes, tuple(tuple(sorted(a)) for a in adj))

    @property
    def size(self) -> int:
        return len(self.nodes)

    def edges(self) -> list[tuple[int, int]]:
        return [(self.nodes[u], self.nodes[v]) for u, nb in enumerate(self.adj) for v in nb
                if u < v]

    def local(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.nodes)}


def connected_components(adj: Sequence[Sequence[int]]) -> list[list[int]]:
    """Components as sorted local-id lists, ordered by smallest member."""
    seen = [False] * len(adj)
    comps = []
    for s in range(len(adj)):
        if seen[s]:
            continue
        seen[s] = True
        stack = [s]
        comp = []
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def articulation_points(adj: Sequence[Sequence[int]]) -> set[int]:
    """Cut vertices by the iterative lowpoint DFS; linear time."""
    h = len(adj)
    disc = [-1] * h
    low = [0] * h
    cuts = set()
    timer = 0
    for root in range(h):
        if disc[root] >= 0:
            continue
        disc[root] = low[root] = timer
        timer += 1
        root_children = 0
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for v in it:
                if disc[v] < 0:
                    disc[v] = low[v] = timer
                    timer += 1
                    if u == root:
                        root_children += 1
                    stack.append((v, u, iter(adj[v])))
                    advanced = True
                    break
                if v != parent and disc[v] < low[u]:
                    low[u] = disc[v]
            if advanced:
                continue
            stack.pop()
            if parent >= 0:
                if low[u] < low[parent]:
                    low[parent] = low[u]
                if parent != root and low[u] >= disc[parent]:
                    cuts.add(parent)
        if root_children > 1:
            cuts.add(root)
    return cuts


@dataclass(frozen=True)
class RecombinationGraph(Graph):
    """VIG restricted to the variables where the parents differ."""

    components: tuple[tuple[int, ...], ...] = ()
    articulation: frozenset[int] = frozenset()

    @property
    def differing(self) -> tuple[int, ...]:
        return self.nodes

    @property
    def h(self) -> int:
        return len(self.nodes)

    @property
    def q(self) -> int:
        return len(self.components)

    @property
    def adjacency(self) -> dict[int, list[int]]:
        return {self.nodes[u]: [self.nodes[v] for v in nb] for u, nb in enumerate(self.adj)}

    def component_sets(self) -> list[set[int]]:
        return [{self.nodes[u] for u in c} for c in self.components]


def build_recombination_graph(vig: Vig, x: np.ndarray, y: np.ndarray) -> RecombinationGraph:
    diff_mask = np.asarray(x) != np.asarray(y)
    nodes = np.flatnonzero(diff_mask)
    local = np.full(vig.n, -1, dtype=np.int64)
    local[nodes] = np.arange(nodes.shape[0])
    adj = []
    ptr, idx = vig.indptr, vig.indices
    for v in nodes:
        nb = idx[ptr[v]:ptr[v + 1]]
        adj.append(tuple(local[nb[diff_mask[nb]]].tolist()))
    comps = connected_components(adj)
    return RecombinationGraph(tuple(nodes.tolist()), tuple(adj),
                              components=tuple(tuple(c) for c in comps),
                              articulation=frozenset(articulation_points(adj)))


# ---------------------------------------------------------------------------
# maximum cardinality search and fill-in
# ---------------------------------------------------------------------------


def tie_ranks(g: Graph, priority: Sequence[int] | None = None, rng=None) -> list[int]:
    """Per-local-node rank used to break MCS ties (lower rank wins).

    Default: variable order.  ``priority`` lists variables to prefer, in order;
    unlisted variables follow in variable order.  ``rng`` draws a random order.
    """
    h = g.size
    if rng is not None:
        return rng.permutation(h).tolist()
    if priority is None:
        return list(range(h))
    local = g.local()
    rank = [h + i for i in range(h)]
    for r, v in enumerate(priority):
        if v in local:
            rank[local[v]] = r
    return rank


def _mcs(adj: Sequence[Sequence[int]], rank: Sequence[int]) -> list[int]:
    """Visit order of maximum cardinality search (first visited gets number h)."""
    h = len(adj)
    weight = [0] * h
    done = [False] * h
    heap = [(0, rank[u], u) for u in range(h)]
    heapq.heapify(heap)
    order = []
    while heap:
        negw, _, u = heapq.heappop(heap)
        if done[u] or -negw != weight[u]:
            continue
        done[u] = True
        order.append(u)
        for v in adj[u]:
            if not done[v]:
                weight[v] += 1
                heapq.heappush(heap, (-weight[v], rank[v], v))
    return order


def maximum_cardinality_search(g: Graph, priority: Sequence[int] | None = None,
                               rng=None) -> dict[int, int]:
    """Number the nodes ``h..1`` by maximum cardinality search.

    Returns ``{variable: gamma}``.  Each component starts at its best-ranked
    node; ties prefer the best rank (see :func:`tie_ranks`).
    """
    order = _mcs(g.adj, tie_ranks(g, priority, rng))
    h = g.size
    return {g.nodes[u]: h - i for i, u in enumerate(order)}


def _fill_in(adj: Sequence[Sequence[int]], gamma: Sequence[int]):
    """Tarjan-Yannakis fill-in for the elimination order ``gamma`` (1 = first).

    Returns the fill edges (local ids) and the completed adjacency sets.
    """
    h = len(adj)
    by_number = [0] * h
    for u in range(h):
        by_number[gamma[u] - 1] = u
    follower = list(range(h))
    index = [0] * h
    chordal = [set(a) for a in adj]
    fill = []
    for i in range(1, h + 1):
        w = by_number[i - 1]
        follower[w] = w
        index[w] = i
        for v in adj[w]:
            if gamma[v] >= i:
                continue
            x = v
            while index[x] < i:
                index[x] = i
                if w not in chordal[x]:
                    chordal[x].add(w)
                    chordal[w].add(x)
                    fill.append((x, w))
                x = follower[x]
            if follower[x] == x:
                follower[x] = w
    return fill, chordal


@dataclass(frozen=True)
class ChordalGraph:
    base: Graph
    fillin_edges: tuple[tuple[int, int], ...]
    gamma: dict[int, int]
    adj: tuple[tuple[int, ...], ...]

    @property
    def nodes(self) -> tuple[int, ...]:
        return self.base.nodes

    @property
    def size(self) -> int:
        return self.base.size

    def as_graph(self) -> Graph:
        return Graph(self.base.nodes, self.adj)


def fill_in(g: Graph, gamma: dict[int, int]) -> ChordalGraph:
    """Add the edges that make ``gamma`` a perfect elimination order."""
    local_gamma = [gamma[v] for v in g.nodes]
    fill, chordal = _fill_in(g.adj, local_gamma)
    edges = tuple((min(g.nodes[a], g.nodes[b]), max(g.nodes[a], g.nodes[b])) for a, b in fill)
    return ChordalGraph(g, edges, dict(gamma), tuple(tuple(sorted(a)) for a in chordal))


def chordalize(g: Graph, priority=None, rng=None) -> ChordalGraph:
    return fill_in(g, maximum_cardinality_search(g, priority, rng))


def is_chordal(g: Graph) -> bool:
    return not chordalize(g).fillin_edges


# ---------------------------------------------------------------------------
# clique tree
# ---------------------------------------------------------------------------


@dataclass
class CliqueNode:
    index: int
    clique: tuple[int, ...]
    parent: int | None
    separator: tuple[int, ...]
    residue: tuple[int, ...]
    children: list[int] = field(default_factory=list)


@dataclass
class CliqueTree:
    cliques: list[CliqueNode]
    roots: list[int]

    def __len__(self) -> int:
        return len(self.cliques)

    def postorder(self) -> list[int]:
        out = []
        for r in self.roots:
            stack = [(r, False)]
            while stack:
                i, expanded = stack.pop()
                if expanded:
                    out.append(i)
                    continue
                stack.append((i, True))
                for c in reversed(self.cliques[i].children):
                    stack.append((c, False))
        return out

    def preorder(self) -> list[int]:
        return list(reversed(self.postorder()))


class NotChordalError(AssertionError):
    pass


def build_clique_tree(cg: ChordalGraph | Graph, priority: Sequence[int] | None = None,
                      rng=None) -> CliqueTree:
    """Clique forest of a chordal graph from one MCS pass.

    A new clique starts whenever the visited node's count of numbered
    neighbours does not exceed its predecessor's; its parent is the clique of
    the most recently visited of those neighbours.  Clique indices follow
    discovery order, so parents always have lower indices.
    """
    g = cg.as_graph() if isinstance(cg, ChordalGraph) else cg
    adj = g.adj
    order = _mcs(adj, tie_ranks(g, priority, rng))
    pos = [0] * g.size
    for i, u in enumerate(order):
        pos[u] = i
    members: list[list[int]] = []
    seps: list[list[int]] = []
    parents: list[int | None] = []
    clique_of = [-1] * g.size
    prev = -1
    current = -1
    for u in order:
        numbered = [v for v in adj[u] if pos[v] < pos[u]]
        if current < 0 or len(numbered) <= prev:
            if numbered:
                last = max(numbered, key=pos.__getitem__)
                parent = clique_of[last]
                pset = set(members[parent])
                if not pset.issuperset(numbered):
                    raise NotChordalError("numbered neighbourhood is not inside one clique")
            else:
                parent = None
            members.append(list(numbered))
            seps.append(sorted(numbered))
            parents.append(parent)
            current = len(members) - 1
        elif not set(members[current]).issuperset(numbered) \
                or len(numbered) != len(members[current]):
            raise NotChordalError("graph is not chordal for this ordering")
        members[current].append(u)
        clique_of[u] = current
        prev = len(numbered)
    nodes = g.nodes
    cliques = []
    roots = []
    for i, mem in enumerate(members):
        sep = set(seps[i])
        cliques.append(CliqueNode(
            index=i,
            clique=tuple(sorted(nodes[u] for u in mem)),
            parent=parents[i],
            separator=tuple(nodes[u] for u in seps[i]),
            residue=tuple(sorted(nodes[u] for u in mem if u not in sep)),
        ))
        if parents[i] is None:
            roots.append(i)
        else:
            cliques[parents[i]].children.append(i)
    return CliqueTree(cliques, roots)


def assign_subfunctions(landscape: MkLandscape, tree: CliqueTree,
                        differing: Sequence[int]) -> list[list[int]]:
    """Give each subfunction touching a differing variable to one covering clique.

    Among cliques containing all its differing variables, the smallest wins
    (lowest index on ties).  Subfunctions over common variables only are left
    out: they are constant across the dynastic potential.
    """
    diff = set(int(v) for v in differing)
    holders: dict[int, list[int]] = {}
    for c in tree.cliques:
        for v in c.clique:
            holders.setdefault(v, []).append(c.index)
    sets = [set(c.clique) for c in tree.cliques]
    assigned: list[list[int]] = [[] for _ in tree.cliques]
    touched = set()
    for v in diff:
        touched.update(landscape.incident(v).tolist())
    for l in sorted(touched):
        vd = [v for v in landscape.sub_vars(l).tolist() if v in diff]
        anchor = min(vd, key=lambda v: len(holders[v]))
        best = None
        for ci in holders[anchor]:
            if sets[ci].issuperset(vd) and (best is None or len(sets[ci]) < len(sets[best])):
                best = ci
        if best is None:
            raise AssertionError(f"subfunction {l} is not covered by any clique")
        assigned[best].append(l)
    return assigned
