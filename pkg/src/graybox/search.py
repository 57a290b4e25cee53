"""Search algorithms hosting the crossovers: hill climber, DRILS, steady-state EA, iDPX."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .crossover import OPERATORS, apply_operator, dpx
from .dp import DEFAULT_BUDGET, BudgetExceeded
from .landscape import ContractError, MkLandscape, Vig, as_solution

log = logging.getLogger(__name__)


def hill_climb(landscape: MkLandscape, vig: Vig, start, rng: np.random.Generator):
    """First-improvement climb to a Hamming-1 local optimum.

    Candidate flips are scanned cyclically along a random permutation fixed
    for the whole climb, resuming after each accepted move.  Returns
    ``(solution, fitness)``; ``start`` is not modified.
    """
    z = as_solution(start, landscape.n).copy()
    perm = rng.permutation(landscape.n).astype(np.int64)
    _kernels.hill_climb(landscape.arrays, vig, z, perm)
    return z, _kernels.evaluate(landscape.arrays, z)


def perturb(s, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Flip ``max(1, round(alpha * n))`` distinct random bits (halves round up)."""
    if not 0 <= alpha <= 1:
        raise ContractError(f"alpha must lie in [0, 1], got {alpha}")
    z = np.array(s, dtype=np.uint8, copy=True)
    n = z.shape[0]
    k = min(n, max(1, math.floor(alpha * n + 0.5)))
    z[rng.choice(n, size=k, replace=False)] ^= 1
    return z


@dataclass
class Trajectory:
    """Best-so-far improvements: (elapsed ns, fitness, iteration)."""

    records: list[tuple[int, int, int]] = field(default_factory=list)

    def add(self, t0: int, fitness: int, iteration: int):
        self.records.append((time.perf_counter_ns() - t0, int(fitness), iteration))

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("elapsed_ns,fitness,iteration\n")
            for t, f, i in self.records:
                fh.write(f"{t},{f},{i}\n")


@dataclass
class RunResult:
    best: np.ndarray
    fitness: int
    iterations: int
    trajectory: Trajectory
    budget_errors: int = 0
    elapsed_ns: int = 0


class _Clock:
    def __init__(self, time_limit: float | None, max_iterations: int | None):
        if time_limit is None and max_iterations is None:
            raise ContractError("need a time limit or an iteration cap")
        self.t0 = time.perf_counter_ns()
        self.deadline = None if time_limit is None else self.t0 + int(time_limit * 1e9)
        self.max_iterations = max_iterations

    def done(self, iteration: int) -> bool:
        if self.max_iterations is not None and iteration >= self.max_iterations:
            return True
        return self.deadline is not None and time.perf_counter_ns() >= self.deadline


# ---------------------------------------------------------------------------
# DRILS
# ---------------------------------------------------------------------------


@dataclass
class DrilsConfig:
    alpha: float
    crossover: str = "dpx"
    beta: int = 2
    time_limit: float | None = 60.0
    max_iterations: int | None = None
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not 0 <= self.alpha <= 0.5:
            raise ContractError(f"alpha must lie in [0, 0.5], got {self.alpha}")
        if self.crossover not in OPERATORS:
            raise ContractError(f"unknown crossover {self.crossover!r}")


def drils(landscape: MkLandscape, vig: Vig, cfg: DrilsConfig) -> RunResult:
    """Deterministic recombination and iterated local search.

    Each iteration climbs from a perturbation of ``x`` to ``y`` and recombines
    them.  An offspring equal to either parent moves the search to ``y``;
    otherwise the climbed offspring becomes ``x``.  Only that second branch
    updates the best solution.  A crossover that exceeds the memory budget
    counts as returning ``y``.
    """
    rng = np.random.default_rng(cfg.seed)
    clock = _Clock(cfg.time_limit, cfg.max_iterations)
    traj = Trajectory()
    x, fx = hill_climb(landscape, vig, rng.integers(0, 2, landscape.n, dtype=np.uint8), rng)
    best, fbest = x, fx
    traj.add(clock.t0, fbest, 0)
    it = 0
    errors = 0
    while not clock.done(it):
        it += 1
        y, fy = hill_climb(landscape, vig, perturb(x, cfg.alpha, rng), rng)
        try:
            rep = apply_operator(cfg.crossover, landscape, vig, x, y, rng, beta=cfg.beta,
                                 fx=fx, fy=fy, budget=cfg.budget)
            z = rep.offspring
        except BudgetExceeded:
            errors += 1
            log.info("iteration %d: crossover budget exceeded, using y", it)
            z = y
        if np.array_equal(z, x) or np.array_equal(z, y):
            x, fx = y, fy
        else:
            x, fx = hill_climb(landscape, vig, z, rng)
            if fx > fbest:
                best, fbest = x, fx
                traj.add(clock.t0, fbest, it)
    return RunResult(best, fbest, it, traj, errors, time.perf_counter_ns() - clock.t0)


# ---------------------------------------------------------------------------
# steady-state EA
# ---------------------------------------------------------------------------

SELECTIONS = ("tournament", "rank", "roulette")


def selection_probabilities(fitness: np.ndarray, scheme: str) -> np.ndarray:
    """Probability of picking each member under ``scheme``."""
    f = np.asarray(fitness, dtype=np.float64)
    N = f.shape[0]
    if scheme == "rank":
        return _ranks(fitness) / (N * (N + 1) / 2)
    if scheme == "roulette":
        if f.min() < 0:
            f = f - f.min()
        total = f.sum()
        return np.full(N, 1 / N) if total == 0 else f / total
    if scheme == "tournament":
        # two picks with replacement: i wins as first pick against anything no
        # better, and as second pick only against something strictly worse
        fv = np.asarray(fitness)
        no_better = (fv[None, :] <= fv[:, None]).sum(axis=1)
        worse = (fv[None, :] < fv[:, None]).sum(axis=1)
        return (no_better + worse) / N**2
    raise ContractError(f"unknown selection {scheme!r}")


def _ranks(fitness) -> np.ndarray:
    """Ranks 1 (worst) .. N (best); equal fitness ranked by position."""
    order = np.argsort(np.asarray(fitness), kind="stable")
    ranks = np.empty(len(order), dtype=np.int64)
    ranks[order] = np.arange(1, len(order) + 1)
    return ranks


def select(fitness: np.ndarray, scheme: str, rng: np.random.Generator) -> int:
    N = len(fitness)
    if scheme == "tournament":
        i, j = rng.integers(N, size=2)
        return int(i) if fitness[i] >= fitness[j] else int(j)
    return int(rng.choice(N, p=selection_probabilities(fitness, scheme)))


@dataclass
class EaConfig:
    popsize: int
    p_m: float
    selection: str
    crossover: str = "dpx"
    beta: int = 2
    time_limit: float | None = 60.0
    max_iterations: int | None = None
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.popsize < 2:
            raise ContractError("popsize must be at least 2")
        if not 0 <= self.p_m <= 0.5:
            raise ContractError(f"p_m must lie in [0, 0.5], got {self.p_m}")
        if self.selection not in SELECTIONS:
            raise ContractError(f"unknown selection {self.selection!r}")
        if self.crossover not in OPERATORS:
            raise ContractError(f"unknown crossover {self.crossover!r}")


@dataclass
class EaResult(RunResult):
    population: np.ndarray | None = None
    population_fitness: np.ndarray | None = None


def ea(landscape: MkLandscape, vig: Vig, cfg: EaConfig, population=None) -> EaResult:
    """Steady-state EA: select two parents, recombine, mutate, replace the worst.

    The offspring replaces the worst member only when strictly better.  An
    iteration whose crossover exceeds the memory budget is skipped.
    """
    rng = np.random.default_rng(cfg.seed)
    clock = _Clock(cfg.time_limit, cfg.max_iterations)
    la = landscape.arrays
    n = landscape.n
    if population is None:
        pop = rng.integers(0, 2, (cfg.popsize, n), dtype=np.uint8)
    else:
        pop = np.array(population, dtype=np.uint8)
        if pop.shape != (cfg.popsize, n):
            raise ContractError(f"population must have shape ({cfg.popsize}, {n})")
    fit = _kernels.evaluate_rows(la, pop).astype(np.int64)
    b = int(fit.argmax())
    best, fbest = pop[b].copy(), int(fit[b])
    traj = Trajectory()
    traj.add(clock.t0, fbest, 0)
    it = 0
    errors = 0
    while not clock.done(it):
        it += 1
        i = select(fit, cfg.selection, rng)
        j = select(fit, cfg.selection, rng)
        try:
            rep = apply_operator(cfg.crossover, landscape, vig, pop[i], pop[j], rng,
                                 beta=cfg.beta, fx=int(fit[i]), fy=int(fit[j]),
                                 budget=cfg.budget)
        except BudgetExceeded:
            errors += 1
            log.info("iteration %d: crossover budget exceeded, skipped", it)
            continue
        z = rep.offspring.copy()
        if cfg.p_m > 0:
            z[rng.random(n) < cfg.p_m] ^= 1
        fz = _kernels.evaluate(la, z)
        w = int(fit.argmin())
        if fz > fit[w]:
            pop[w] = z
            fit[w] = fz
            if fz > fbest:
                best, fbest = z, fz
                traj.add(clock.t0, fbest, it)
    return EaResult(best, fbest, it, traj, errors, time.perf_counter_ns() - clock.t0,
                    population=pop, population_fitness=fit)


# ---------------------------------------------------------------------------
# iDPX
# ---------------------------------------------------------------------------


def idpx(landscape: MkLandscape, vig: Vig, beta: int, time_limit: float | None = 60.0,
         seed: int = 0, max_iterations: int | None = None,
         budget: int = DEFAULT_BUDGET) -> RunResult:
    """Repeated DPX of a random solution and its complement."""
    rng = np.random.default_rng(seed)
    clock = _Clock(time_limit, max_iterations)
    traj = Trajectory()
    best, fbest = None, None
    it = 0
    errors = 0
    while it == 0 or not clock.done(it):
        it += 1
        x = rng.integers(0, 2, landscape.n, dtype=np.uint8)
        try:
            rep = dpx(landscape, vig, x, 1 - x, beta, budget=budget)
        except BudgetExceeded:
            errors += 1
            log.info("iteration %d: DPX budget exceeded, pair discarded", it)
            continue
        if fbest is None or rep.fitness > fbest:
            best, fbest = rep.offspring, rep.fitness
            traj.add(clock.t0, fbest, it)
    return RunResult(best, fbest, it, traj, errors, time.perf_counter_ns() - clock.t0)


# ---------------------------------------------------------------------------
# tuned presets
# ---------------------------------------------------------------------------

# irace output for n = 10000 NKQ instances and for the MAX-SAT benchmark sets
# (not re-tuned here).  DRILS: (beta, alpha); EA: (beta, p_m, selection, popsize).
_DRILS = {
    "nkq-k2": {"dpx": (1, 0.2219), "apx": (None, 0.1873), "px": (None, 0.1240),
               "nx": (None, 0.0154), "ux": (None, 0.0159)},
    "nkq-k5": {"dpx": (3, 0.0462), "apx": (None, 0.0231), "px": (None, 0.0191),
               "nx": (None, 0.0268), "ux": (None, 0.0238)},
    "maxsat-unweighted": {"dpx": (4, 0.0582), "apx": (None, 0.0941), "px": (None, 0.0482),
                          "nx": (None, 0.0299), "ux": (None, 0.0571)},
    "maxsat-weighted": {"dpx": (2, 0.1832), "apx": (None, 0.1870), "px": (None, 0.0996),
                        "nx": (None, 0.0241), "ux": (None, 0.0214)},
}
_EA = {
    "nkq-k2": {"dpx": (3, 0.0044, "roulette", 61), "apx": (None, 0.0172, "roulette", 72),
               "px": (None, 0.0084, "rank", 47), "nx": (None, 0.0007, "roulette", 37),
               "ux": (None, 0.0003, "rank", 41)},
    "nkq-k5": {"dpx": (2, 0.0080, "rank", 15), "apx": (None, 0.0002, "roulette", 27),
               "px": (None, 0.0034, "rank", 70), "nx": (None, 0.0008, "rank", 54),
               "ux": (None, 0.0006, "roulette", 14)},
    "maxsat-unweighted": {"dpx": (5, 0.0038, "rank", 18),
                          "apx": (None, 0.0096, "tournament", 19),
                          "px": (None, 0.0051, "tournament", 27),
                          "nx": (None, 0.0047, "rank", 18), "ux": (None, 0.0019, "rank", 18)},
    "maxsat-weighted": {"dpx": (2, 0.0018, "rank", 52), "apx": (None, 0.0069, "tournament", 24),
                        "px": (None, 0.0086, "rank", 20), "nx": (None, 0.0020, "rank", 27),
                        "ux": (None, 0.0012, "tournament", 78)},
}
PRESET_FAMILIES = tuple(_DRILS)


def drils_preset(family: str, crossover: str, **overrides) -> DrilsConfig:
    beta, alpha = _DRILS[family][crossover]
    kw = {"alpha": alpha, "crossover": crossover, "beta": beta if beta is not None else 0}
    kw.update(overrides)
    return DrilsConfig(**kw)


def ea_preset(family: str, crossover: str, **overrides) -> EaConfig:
    beta, pm, sel, pop = _EA[family][crossover]
    kw = {"popsize": pop, "p_m": pm, "selection": sel, "crossover": crossover,
          "beta": beta if beta is not None else 0}
    kw.update(overrides)
    return EaConfig(**kw)
