"""Exploration plans and the clique-tree dynamic program behind DPX.

Configurations are flip masks relative to the first parent ``x``: bit 1 on a
differing variable means "take it from ``y``".  Table keys are the packed
flip bits of a clique's separator variables in ascending variable order, so
a parent clique can look up any projection of its own configurations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from . import _kernels
from .chordal import CliqueTree
from .landscape import MkLandscape

DEFAULT_BUDGET = 1 << 26


class BudgetExceeded(RuntimeError):
    """The DP would need more table entries than the configured budget."""


@dataclass
class CliquePlan:
    index: int
    s_vars: np.ndarray
    r_vars: np.ndarray
    # unit = list of positions into s_vars / r_vars; explored units come first,
    # the merged rest group (if any) last
    s_units: list[list[int]]
    r_units: list[list[int]]
    s_explored: int
    r_explored: int
    # residue positions whose class already meets the separator: (r position, s unit)
    r_tied: list[tuple[int, int]]

    @property
    def n_configs(self) -> int:
        return 1 << (len(self.s_units) + len(self.r_units))


@dataclass
class ExplorationPlan:
    beta: int
    differing: tuple[int, ...]
    classes: DisjointSet
    cliques: list[CliquePlan]
    order: list[int]

    def final_classes(self) -> list[set[int]]:
        return [set(c) for c in self.classes.subsets()]

    @property
    def log2_explored(self) -> int:
        return self.classes.n_subsets

    @property
    def full_dynastic(self) -> bool:
        return self.classes.n_subsets == len(self.differing)


def plan_exploration(tree: CliqueTree, articulation, beta: int,
                     differing: Sequence[int] | None = None) -> ExplorationPlan:
    """Decide which classes each clique enumerates individually.

    Cliques are visited in post-order.  For the separator, then the residue,
    the current classes meeting the set are the units; articulation-point
    units go first, then by smallest variable.  The first ``beta`` units are
    explored and the rest are merged into a single class.  Residue classes
    that already meet the separator are decided by the separator and are not
    units of the residue.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if differing is None:
        differing = sorted(v for c in tree.cliques for v in c.residue)
    differing = tuple(int(v) for v in differing)
    art = set(articulation)
    ds = DisjointSet(differing)

    def units_of(vars_, skip_roots=()):
        groups: dict[int, list[int]] = {}
        for p, v in enumerate(vars_):
            r = ds[v]
            if r in skip_roots:
                continue
            groups.setdefault(r, []).append(p)
        units = list(groups.values())
        units.sort(key=lambda u: (not any(vars_[p] in art for p in u), min(vars_[p] for p in u)))
        return units

    def cap(vars_, units):
        explored = units[:beta]
        rest = units[beta:]
        if len(rest) > 1:
            first = vars_[rest[0][0]]
            for u in rest[1:]:
                ds.merge(first, vars_[u[0]])
        if rest:
            explored = explored + [sorted(p for u in rest for p in u)]
        return explored, min(beta, len(units))

    order = tree.postorder()
    plans: list[CliquePlan | None] = [None] * len(tree.cliques)
    for i in order:
        c = tree.cliques[i]
        s_vars = list(c.separator)
        r_vars = list(c.residue)
        s_units, s_explored = cap(s_vars, units_of(s_vars))
        s_root = {ds[s_vars[u[0]]]: k for k, u in enumerate(s_units)}
        r_tied = [(p, s_root[ds[v]]) for p, v in enumerate(r_vars) if ds[v] in s_root]
        r_units, r_explored = cap(r_vars, units_of(r_vars, skip_roots=s_root))
        plans[i] = CliquePlan(i, np.asarray(s_vars, dtype=np.int64),
                              np.asarray(r_vars, dtype=np.int64), s_units, r_units,
                              s_explored, r_explored, r_tied)
    return ExplorationPlan(beta, differing, ds, plans, order)


def _pack(bits: np.ndarray) -> np.ndarray:
    packed = np.ascontiguousarray(np.packbits(bits, axis=1))
    return packed.view(np.dtype((np.void, packed.shape[1]))).ravel()


@lru_cache(maxsize=64)
def _unit_bits(count: int, units: int) -> np.ndarray:
    bits = ((np.arange(count)[:, None] >> np.arange(units)) & 1).astype(np.uint8)
    bits.setflags(write=False)
    return bits


@dataclass
class _Table:
    keys: np.ndarray | None   # sorted packed separator keys (None at roots)
    values: np.ndarray
    residue: np.ndarray       # best residue flips per key, shape (W, |R|)

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.keys, keys)
        idx[idx == self.keys.shape[0]] = 0
        if not (self.keys[idx] == keys).all():
            raise AssertionError("separator configuration missing from child table")
        return idx


@dataclass
class DpResult:
    offspring: np.ndarray
    best_value: int
    evaluations: int
    table_entries: int
    tables: list


def dp_offspring(landscape: MkLandscape, tree: CliqueTree, assigned: list[list[int]],
                 plan: ExplorationPlan, x: np.ndarray, y: np.ndarray,
                 budget: int = DEFAULT_BUDGET) -> DpResult:
    """Best offspring over the configurations the plan allows.

    ``best_value`` is the summed value of the assigned subfunctions at the
    offspring; subfunctions over common variables only are not included.
    """
    la = landscape.arrays
    x = np.ascontiguousarray(x, dtype=np.uint8)
    tables: list[_Table | None] = [None] * len(tree.cliques)
    evaluations = 0
    entries = 0
    for i in plan.order:
        cp = plan.cliques[i]
        ns, nr = cp.s_vars.shape[0], cp.r_vars.shape[0]
        us, ur = len(cp.s_units), len(cp.r_units)
        W, V = 1 << us, 1 << ur
        entries += W
        if entries > budget or W * V > budget:
            raise BudgetExceeded(f"DP needs more than {budget} table entries")
        wbits = _unit_bits(W, us)
        vbits = _unit_bits(V, ur)
        wmat = np.zeros((W, ns), dtype=np.uint8)
        for k, unit in enumerate(cp.s_units):
            wmat[:, unit] = wbits[:, k:k + 1]
        flips = np.zeros((W, V, ns + nr), dtype=np.uint8)
        flips[:, :, :ns] = wmat[:, None, :]
        for k, unit in enumerate(cp.r_units):
            flips[:, :, [ns + p for p in unit]] = vbits[None, :, k:k + 1]
        for p, k in cp.r_tied:
            flips[:, :, ns + p] = wbits[:, k:k + 1]
        flips = flips.reshape(W * V, ns + nr)
        cvars = np.concatenate([cp.s_vars, cp.r_vars])
        subs = np.asarray(assigned[i], dtype=np.int64)
        scores = _kernels.score_configs(la, x, cvars, flips, subs)
        evaluations += W * V
        pos = {int(v): p for p, v in enumerate(cvars)}
        for j in tree.cliques[i].children:
            child = tables[j]
            cols = [pos[int(v)] for v in plan.cliques[j].s_vars]
            scores = scores + child.values[child.lookup(_pack(flips[:, cols]))]
        scores = scores.reshape(W, V)
        best = scores.argmax(axis=1)
        values = scores[np.arange(W), best]
        residue = flips.reshape(W, V, ns + nr)[np.arange(W), best, ns:]
        if ns:
            keys = _pack(wmat)
            o = np.argsort(keys, kind="stable")
            tables[i] = _Table(keys[o], values[o], residue[o])
        else:
            tables[i] = _Table(None, values, residue)

    flipmask = np.zeros_like(x)
    for i in range(len(tree.cliques)):
        cp = plan.cliques[i]
        t = tables[i]
        row = 0 if t.keys is None else int(t.lookup(_pack(flipmask[cp.s_vars][None, :]))[0])
        flipmask[cp.r_vars] = t.residue[row]
    best_value = int(sum(int(tables[r].values[0]) for r in tree.roots))
    return DpResult(x ^ flipmask, best_value, evaluations, entries, tables)
