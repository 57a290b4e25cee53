"""Recombination operators: UX, NX, PX, APX and DPX."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .chordal import (RecombinationGraph, assign_subfunctions, build_clique_tree,
                      build_recombination_graph, chordalize, connected_components)
from .dp import DEFAULT_BUDGET, BudgetExceeded, dp_offspring, plan_exploration
from .landscape import ContractError, MkLandscape, Vig, as_solution

__all__ = ["CrossoverReport", "BudgetExceeded", "qir", "uniform_crossover", "network_crossover",
           "partition_crossover", "articulation_points_crossover", "dpx", "OPERATORS"]

APX_EXACT_MAX_H = 24
APX_ENUM_CAP = 1 << 20


def qir(fx: int, fy: int, fz: int) -> Fraction:
    """Quality improvement ratio of ``fz`` over the better parent."""
    best = max(fx, fy)
    if best <= 0:
        raise ValueError(f"cannot normalise by non-positive parent fitness {best}")
    return Fraction(fz - best, best)


@dataclass
class CrossoverReport:
    operator: str
    offspring: np.ndarray
    fitness: int
    fitness_x: int
    fitness_y: int
    h: int
    elapsed_ns: int = 0
    log2_explored: int | None = None
    full_dynastic: bool | None = None
    exact_count: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def qir(self) -> Fraction | None:
        if max(self.fitness_x, self.fitness_y) <= 0:
            return None
        return qir(self.fitness_x, self.fitness_y, self.fitness)


def _parents(landscape, x, y, fx, fy):
    x = as_solution(x, landscape.n)
    y = as_solution(y, landscape.n)
    la = landscape.arrays
    if fx is None:
        fx = _kernels.evaluate(la, x)
    if fy is None:
        fy = _kernels.evaluate(la, y)
    return x, y, int(fx), int(fy)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter_ns()
        report = fn(*args, **kwargs)
        report.elapsed_ns = time.perf_counter_ns() - t0
        return report
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------------------
# blind operators
# ---------------------------------------------------------------------------


@_timed
def uniform_crossover(landscape: MkLandscape, x, y, rng: np.random.Generator,
                      fx=None, fy=None) -> CrossoverReport:
    """Each differing bit comes from ``x`` or ``y`` with probability 1/2."""
    x, y, fx, fy = _parents(landscape, x, y, fx, fy)
    diff = np.flatnonzero(x != y)
    z = x.copy()
    take = diff[rng.random(diff.shape[0]) < 0.5]
    z[take] = y[take]
    return CrossoverReport("ux", z, _kernels.evaluate(landscape.arrays, z), fx, fy, len(diff))


def network_selection(vig: Vig, rng: np.random.Generator) -> list[int]:
    """Randomized BFS over the VIG until half of the variables are selected.

    Variables are selected when enqueued; neighbours are enqueued in random
    order.  An exhausted component restarts from a random unselected variable.
    Returns the selected variables in selection order.
    """
    n = vig.n
    quota = n // 2
    selected = np.zeros(n, dtype=bool)
    out: list[int] = []
    queue: list[int] = []
    head = 0
    while len(out) < quota:
        if head == len(queue):
            free = np.flatnonzero(~selected)
            s = int(free[rng.integers(free.shape[0])])
            selected[s] = True
            out.append(s)
            queue.append(s)
            continue
        u = queue[head]
        head += 1
        nb = vig.neighbors(u)
        nb = nb[~selected[nb]]
        for v in rng.permutation(nb).tolist():
            if len(out) == quota:
                break
            selected[v] = True
            out.append(v)
            queue.append(v)
    return out


@_timed
def network_crossover(landscape: MkLandscape, vig: Vig, x, y, rng: np.random.Generator,
                      fx=None, fy=None) -> CrossoverReport:
    """Take a BFS-grown half of the variables from one parent, the rest from the other."""
    x, y, fx, fy = _parents(landscape, x, y, fx, fy)
    sel = np.asarray(network_selection(vig, rng), dtype=np.int64)
    if rng.random() < 0.5:
        z = y.copy()
        z[sel] = x[sel]
    else:
        z = x.copy()
        z[sel] = y[sel]
    h = int((x != y).sum())
    return CrossoverReport("nx", z, _kernels.evaluate(landscape.arrays, z), fx, fy, h,
                           extra={"selected": sel})


# ---------------------------------------------------------------------------
# partition crossover and its articulation-point extension
# ---------------------------------------------------------------------------


def _component_gains(landscape, nodes, comps, base, other, vb, vo):
    """Per component: sum over touching subfunctions of f(other) - f(base).

    Only correct when each subfunction's differing variables fall inside one
    component, which holds for components of the recombination graph.
    """
    gains = []
    for comp in comps:
        subs = set()
        for u in comp:
            subs.update(landscape.incident(nodes[u]).tolist())
        idx = np.fromiter(subs, dtype=np.int64, count=len(subs))
        gains.append(int(vo[idx].sum() - vb[idx].sum()))
    return gains


def _px_core(landscape, nodes, adj, comps, x, y, vx, vy):
    """PX offspring bits and fitness gain over ``x`` for given components."""
    gains = _component_gains(landscape, nodes, comps, x, y, vx, vy)
    z = x.copy()
    chosen = []
    gain = 0
    for comp, g in zip(comps, gains):
        if g > 0:
            idx = [nodes[u] for u in comp]
            z[idx] = y[idx]
            chosen.append(True)
            gain += g
        else:
            chosen.append(False)
    return z, gain, chosen


@_timed
def partition_crossover(landscape: MkLandscape, vig: Vig, x, y, fx=None, fy=None,
                        rg: RecombinationGraph | None = None) -> CrossoverReport:
    """Choose, per recombining component, the parent with the better partial sum.

    Ties keep ``x``.
    """
    x, y, fx, fy = _parents(landscape, x, y, fx, fy)
    if rg is None:
        rg = build_recombination_graph(vig, x, y)
    la = landscape.arrays
    vx = _kernels.subfunction_values(la, x)
    vy = _kernels.subfunction_values(la, y)
    z, gain, _ = _px_core(landscape, rg.nodes, rg.adj, rg.components, x, y, vx, vy)
    return CrossoverReport("px", z, fx + gain, fx, fy, rg.h, log2_explored=rg.q,
                           full_dynastic=rg.q == rg.h)


def _values_with(landscape, vals, z, var, bit):
    """Subfunction values of ``z`` with ``z[var]`` set to ``bit`` (copy)."""
    out = vals.copy()
    if z[var] == bit:
        return out
    z2 = z.copy()
    z2[var] = bit
    for l in landscape.incident(var).tolist():
        sf = landscape.subfunctions[l]
        out[l] = sf.value(z2[list(sf.vars)])
    return out


def _apx_applications(rg: RecombinationGraph):
    """Yield (base, removed, components) for every PX application APX makes.

    ``base`` is 0 for PX(x, .) and 1 for PX(y, .); ``removed`` is the local
    id of the articulation point held at the base parent's value (or None).
    """
    yield 0, None, rg.components
    for a in sorted(rg.articulation):
        sub = [[v for v in nb if v != a] if u != a else [] for u, nb in enumerate(rg.adj)]
        comps = [c for c in connected_components(sub) if c != [a]]
        yield 0, a, comps
        yield 1, a, comps


@_timed
def articulation_points_crossover(landscape: MkLandscape, vig: Vig, x, y, fx=None, fy=None,
                                  rg: RecombinationGraph | None = None,
                                  exact_max_h: int = APX_EXACT_MAX_H,
                                  enum_cap: int = APX_ENUM_CAP) -> CrossoverReport:
    """Best of PX and of PX with each articulation point held at either parent.

    For each articulation point ``a`` this runs PX(x, y with a taken from x)
    and PX(y, x with a taken from y).  The explored count is exact (by
    enumerating candidate masks) when ``h <= exact_max_h`` and the total is
    at most ``enum_cap``; otherwise it is the sum of per-application counts,
    an upper bound, and ``exact_count`` is False.
    """
    x, y, fx, fy = _parents(landscape, x, y, fx, fy)
    if rg is None:
        rg = build_recombination_graph(vig, x, y)
    la = landscape.arrays
    vx = _kernels.subfunction_values(la, x)
    vy = _kernels.subfunction_values(la, y)
    nodes = rg.nodes
    parents = ((x, y, vx, vy, fx), (y, x, vy, vx, fy))

    best_z, best_f = None, None
    apps = list(_apx_applications(rg))
    for base, a, comps in apps:
        b, o, vb, vo, fb = parents[base]
        if a is not None:
            var = nodes[a]
            o = o.copy()
            o[var] = b[var]
            vo = _values_with(landscape, vo, parents[1 - base][0], var, b[var])
        z, gain, _ = _px_core(landscape, nodes, rg.adj, comps, b, o, vb, vo)
        if best_f is None or fb + gain > best_f:
            best_z, best_f = z, fb + gain

    total = sum(1 << len(comps) for _, _, comps in apps)
    exact = rg.h <= exact_max_h and total <= enum_cap
    if exact:
        count = len(_apx_candidates(rg, apps))
    else:
        count = total
    log2 = min(rg.h, math.ceil(math.log2(count))) if count > 1 else 0
    return CrossoverReport("apx", best_z, best_f, fx, fy, rg.h, log2_explored=log2,
                           full_dynastic=exact and log2 == rg.h, exact_count=exact,
                           extra={"candidates": count})


def _apx_candidates(rg: RecombinationGraph, apps=None) -> set[int]:
    """Distinct offspring as bitmasks over local ids (bit set = value of ``y``)."""
    if apps is None:
        apps = list(_apx_applications(rg))
    full = (1 << rg.h) - 1
    seen: set[int] = set()
    for base, _, comps in apps:
        masks = [sum(1 << u for u in c) for c in comps]
        level = [0 if base == 0 else full]
        for m in masks:
            level = level + [s ^ m for s in level]
        seen.update(level)
    return seen


# ---------------------------------------------------------------------------
# dynastic potential crossover
# ---------------------------------------------------------------------------


@_timed
def dpx(landscape: MkLandscape, vig: Vig, x, y, beta: int, fx=None, fy=None,
        budget: int = DEFAULT_BUDGET, priority: Sequence[int] | None = None,
        rng: np.random.Generator | None = None,
        rg: RecombinationGraph | None = None) -> CrossoverReport:
    """Dynastic potential crossover.

    Chordalizes the recombination graph, builds its clique tree and runs the
    dynamic program restricted to at most ``beta`` explored units per
    separator and residue.  ``priority`` and ``rng`` control MCS tie-breaking.
    Raises :class:`BudgetExceeded` when the tables would exceed ``budget``.
    """
    if beta < 0:
        raise ContractError("beta must be non-negative")
    x, y, fx, fy = _parents(landscape, x, y, fx, fy)
    if rg is None:
        rg = build_recombination_graph(vig, x, y)
    if rg.h == 0:
        return CrossoverReport("dpx", x.copy(), fx, fx, fy, 0, log2_explored=0,
                               full_dynastic=True, extra={"evaluations": 0})
    cg = chordalize(rg, priority, rng)
    tree = build_clique_tree(cg, priority, rng)
    assigned = assign_subfunctions(landscape, tree, rg.nodes)
    plan = plan_exploration(tree, rg.articulation, beta, rg.nodes)
    res = dp_offspring(landscape, tree, assigned, plan, x, y, budget)
    vx = _kernels.subfunction_values(landscape.arrays, x)
    touched = [l for ls in assigned for l in ls]
    fitness = fx - int(vx[touched].sum()) + res.best_value
    return CrossoverReport("dpx", res.offspring, fitness, fx, fy, rg.h,
                           log2_explored=plan.log2_explored,
                           full_dynastic=plan.full_dynastic,
                           extra={"evaluations": res.evaluations, "cliques": len(tree),
                                  "fill_in": len(cg.fillin_edges),
                                  "table_entries": res.table_entries})


OPERATORS = ("ux", "nx", "px", "apx", "dpx")


def apply_operator(name: str, landscape: MkLandscape, vig: Vig, x, y, rng, beta: int = 2,
                   fx=None, fy=None, budget: int = DEFAULT_BUDGET) -> CrossoverReport:
    if name == "ux":
        return uniform_crossover(landscape, x, y, rng, fx=fx, fy=fy)
    if name == "nx":
        return network_crossover(landscape, vig, x, y, rng, fx=fx, fy=fy)
    if name == "px":
        return partition_crossover(landscape, vig, x, y, fx=fx, fy=fy)
    if name == "apx":
        return articulation_points_crossover(landscape, vig, x, y, fx=fx, fy=fy)
    if name == "dpx":
        return dpx(landscape, vig, x, y, beta, fx=fx, fy=fy, budget=budget)
    raise ValueError(f"unknown operator {name!r}; expected one of {OPERATORS}")
