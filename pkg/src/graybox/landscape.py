"""k-bounded pseudo-Boolean functions (Mk Landscapes) and their interaction graph."""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

INT64_MAX = np.iinfo(np.int64).max


class ContractError(ValueError):
    """Raised when an argument violates an operation's precondition."""


@dataclass(frozen=True)
class Subfunction:
    """One term of an Mk Landscape.

    Either a lookup table of ``2**len(vars)`` integers, indexed with the first
    variable as the most significant bit, or a weighted clause that scores
    ``weight`` when at least one literal is satisfied.
    """

    vars: tuple[int, ...]
    table: tuple[int, ...] | None = None
    negated: tuple[bool, ...] | None = None
    weight: int | None = None

    def __post_init__(self):
        k = len(self.vars)
        if k < 1:
            raise ContractError("subfunction arity must be at least 1")
        if len(set(self.vars)) != k:
            raise ContractError(f"repeated variable in subfunction {self.vars}")
        if (self.table is None) == (self.weight is None):
            raise ContractError("subfunction needs exactly one of table or clause weight")
        if self.table is not None:
            if len(self.table) != 1 << k:
                raise ContractError(f"table of arity {k} must have {1 << k} entries, "
                                    f"got {len(self.table)}")
        else:
            if self.weight < 0:
                raise ContractError("clause weight must be non-negative")
            if self.negated is None or len(self.negated) != k:
                raise ContractError("clause needs one polarity flag per literal")

    @classmethod
    def from_table(cls, vars: Sequence[int], table: Iterable[int]) -> "Subfunction":
        return cls(tuple(int(v) for v in vars), table=tuple(int(t) for t in table))

    @classmethod
    def clause(cls, literals: Sequence[int], weight: int = 1) -> "Subfunction":
        """Build a clause from signed 0-based literals: ``v`` or ``~v`` (i.e. ``-v-1``)."""
        vars = tuple(v if v >= 0 else ~v for v in literals)
        neg = tuple(v < 0 for v in literals)
        return cls(vars, negated=neg, weight=int(weight))

    @property
    def is_clause(self) -> bool:
        return self.weight is not None

    def value(self, bits: Sequence[int]) -> int:
        """Evaluate on the values of ``self.vars`` (in that order)."""
        if self.is_clause:
            sat = any(int(b) != int(n) for b, n in zip(bits, self.negated))
            return self.weight if sat else 0
        idx = 0
        for b in bits:
            idx = (idx << 1) | int(b)
        return self.table[idx]

    def bounds(self) -> tuple[int, int]:
        if self.is_clause:
            return 0, self.weight
        return min(self.table), max(self.table)


@dataclass(frozen=True)
class _Arrays:
    sub_ptr: np.ndarray
    sub_vars: np.ndarray
    sub_neg: np.ndarray
    sub_shift: np.ndarray
    kind: np.ndarray
    tab_ptr: np.ndarray
    tables: np.ndarray
    weights: np.ndarray
    var_ptr: np.ndarray
    var_subs: np.ndarray


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class MkLandscape:
    """Sum of ``m`` subfunctions over ``n`` binary variables.

    Instances are immutable; the flat arrays in :attr:`arrays` feed the
    compiled kernels.
    """

    def __init__(self, n: int, subfunctions: Sequence[Subfunction], name: str = "",
                 nkq_params: tuple[int, int, int, int] | None = None):
        if n < 1:
            raise ContractError("landscape needs at least one variable")
        self.n = int(n)
        self.subfunctions = tuple(subfunctions)
        self.name = name
        self.nkq_params = nkq_params
        magnitude = 0
        for sf in self.subfunctions:
            if max(sf.vars) >= self.n or min(sf.vars) < 0:
                raise ContractError(f"variable out of range [0, {self.n}) in {sf.vars}")
            magnitude += max(map(abs, sf.bounds()))
        # bounding every partial sum keeps int64 accumulation exact
        if magnitude > INT64_MAX:
            raise OverflowError("landscape fitness range exceeds 64-bit integers")
        self.kmax = max((len(sf.vars) for sf in self.subfunctions), default=0)
        self.arrays = self._flatten()

    @property
    def m(self) -> int:
        return len(self.subfunctions)

    def _flatten(self) -> _Arrays:
        m = self.m
        lens = np.array([len(sf.vars) for sf in self.subfunctions], dtype=np.int64)
        sub_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(lens, out=sub_ptr[1:])
        sub_vars = np.array([v for sf in self.subfunctions for v in sf.vars], dtype=np.int64)
        sub_neg = np.array([int(b) for sf in self.subfunctions
                            for b in (sf.negated or (0,) * len(sf.vars))], dtype=np.uint8)
        sub_shift = np.array([k - 1 - j for k in lens for j in range(k)], dtype=np.int64)
        kind = np.array([sf.is_clause for sf in self.subfunctions], dtype=np.uint8)
        tab_ptr = np.zeros(m, dtype=np.int64)
        chunks = []
        off = 0
        for l, sf in enumerate(self.subfunctions):
            tab_ptr[l] = off
            if sf.table is not None:
                chunks.append(sf.table)
                off += len(sf.table)
        tables = np.array([t for c in chunks for t in c], dtype=np.int64)
        if tables.size == 0:
            tables = np.zeros(1, dtype=np.int64)
        weights = np.array([sf.weight or 0 for sf in self.subfunctions], dtype=np.int64)
        # variable -> incident subfunctions
        order = np.argsort(sub_vars, kind="stable")
        owner = np.repeat(np.arange(m, dtype=np.int64), lens)
        var_subs = owner[order]
        var_ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(sub_vars, minlength=self.n), out=var_ptr[1:])
        return _Arrays(*(_readonly(a) for a in (sub_ptr, sub_vars, sub_neg, sub_shift, kind,
                                                tab_ptr, tables, weights, var_ptr, var_subs)))

    def sub_vars(self, l: int) -> np.ndarray:
        a = self.arrays
        return a.sub_vars[a.sub_ptr[l]:a.sub_ptr[l + 1]]

    def incident(self, v: int) -> np.ndarray:
        """Indices of subfunctions that depend on variable ``v``."""
        a = self.arrays
        return a.var_subs[a.var_ptr[v]:a.var_ptr[v + 1]]

    def __repr__(self) -> str:
        return f"MkLandscape(n={self.n}, m={self.m}, kmax={self.kmax})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, MkLandscape):
            return NotImplemented
        return self.n == other.n and self.subfunctions == other.subfunctions

    __hash__ = None


def as_solution(bits, n: int | None = None) -> np.ndarray:
    """Coerce to a contiguous uint8 bit vector, checking length and alphabet."""
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    z = np.ascontiguousarray(bits, dtype=np.uint8)
    if z.ndim != 1:
        raise ContractError("solution must be one-dimensional")
    if n is not None and z.shape[0] != n:
        raise ContractError(f"solution length {z.shape[0]} != landscape size {n}")
    if (z > 1).any():
        raise ContractError("solution must be binary")
    return z


def evaluate(landscape: MkLandscape, s) -> int:
    """Exact integer fitness of ``s``."""
    z = as_solution(s, landscape.n)
    return _kernels.evaluate(landscape.arrays, z)


def evaluate_subfunction(landscape: MkLandscape, l: int, s) -> int:
    if not 0 <= l < landscape.m:
        raise IndexError(f"subfunction index {l} out of range [0, {landscape.m})")
    z = as_solution(s, landscape.n)
    sf = landscape.subfunctions[l]
    return sf.value(z[list(sf.vars)])


def subfunction_values(landscape: MkLandscape, s) -> np.ndarray:
    z = as_solution(s, landscape.n)
    return _kernels.subfunction_values(landscape.arrays, z)


def evaluate_many(landscape: MkLandscape, zs: np.ndarray) -> np.ndarray:
    zs = np.ascontiguousarray(zs, dtype=np.uint8)
    if zs.ndim != 2 or zs.shape[1] != landscape.n:
        raise ContractError(f"expected shape (rows, {landscape.n}), got {zs.shape}")
    return _kernels.evaluate_rows(landscape.arrays, zs)


class Vig:
    """Variable interaction graph in CSR form with sorted neighbour lists."""

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = n
        self.indptr = _readonly(np.asarray(indptr, dtype=np.int64))
        self.indices = _readonly(np.asarray(indices, dtype=np.int64))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Vig":
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([e, e[:, ::-1]])
        both = np.unique(both, axis=0) if both.size else both
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(both[:, 0], minlength=n), out=indptr[1:])
        return cls(n, indptr, both[:, 1].copy())

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, int(v)) for u in range(self.n) for v in self.neighbors(u) if u < v]

    def num_edges(self) -> int:
        return self.indices.shape[0] // 2


def build_vig(landscape: MkLandscape) -> Vig:
    """Co-occurrence graph: ``i ~ j`` iff some subfunction contains both."""
    pairs = []
    for sf in landscape.subfunctions:
        v = np.asarray(sf.vars, dtype=np.int64)
        if v.shape[0] > 1:
            a, b = np.meshgrid(v, v, indexing="ij")
            pairs.append(np.stack([a.ravel(), b.ravel()], axis=1))
    edges = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
    return Vig.from_edges(landscape.n, edges)


# ---------------------------------------------------------------------------
# NKQ landscapes
# ---------------------------------------------------------------------------


def generate_nkq(n: int, K: int, Q: int, seed: int) -> MkLandscape:
    """Random NKQ landscape with one subfunction per variable.

    Subfunction ``l`` reads ``x_l`` followed by ``K`` distinct other variables
    drawn uniformly without replacement; every table entry is an independent
    uniform integer in ``[0, Q-1]``.
    """
    if K < 0 or n < K + 1:
        raise ContractError(f"need n >= K+1 and K >= 0, got n={n}, K={K}")
    if Q < 2:
        raise ContractError(f"need Q >= 2, got {Q}")
    rng = np.random.default_rng(seed)
    subs = []
    for l in range(n):
        others = rng.choice(n - 1, size=K, replace=False)
        others = others + (others >= l)
        table = rng.integers(0, Q, size=1 << (K + 1))
        subs.append(Subfunction.from_table((l, *others.tolist()), table.tolist()))
    return MkLandscape(n, subs, name=f"nkq-n{n}-K{K}-Q{Q}-s{seed}", nkq_params=(n, K, Q, seed))


def dumps_nkq(landscape: MkLandscape) -> str:
    """Plain-text NKQ format.

    Header ``nkq n K Q seed``, then one line per subfunction: its ``K+1``
    variables followed by its ``2**(K+1)`` table values.
    """
    n, K, Q, seed = landscape.nkq_params or _infer_nkq(landscape)
    out = io.StringIO()
    out.write(f"nkq {n} {K} {Q} {seed}\n")
    for sf in landscape.subfunctions:
        out.write(" ".join(map(str, sf.vars)))
        out.write(" ")
        out.write(" ".join(map(str, sf.table)))
        out.write("\n")
    return out.getvalue()


def _infer_nkq(landscape: MkLandscape):
    ks = {len(sf.vars) for sf in landscape.subfunctions}
    if len(ks) != 1 or any(sf.is_clause for sf in landscape.subfunctions):
        raise ContractError("only uniform-arity table landscapes can be written as NKQ")
    K = ks.pop() - 1
    Q = max(max(sf.table) for sf in landscape.subfunctions) + 1
    return landscape.n, K, Q, -1


def loads_nkq(text: str) -> MkLandscape:
    lines = [ln.split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln[0].startswith("#")]
    if not lines or lines[0][0] != "nkq" or len(lines[0]) != 5:
        raise ValueError("line 1: expected header 'nkq n K Q seed'")
    n, K, Q, seed = (int(t) for t in lines[0][1:])
    width = K + 1 + (1 << (K + 1))
    subs = []
    for i, ln in enumerate(lines[1:], start=2):
        if len(ln) != width:
            raise ValueError(f"subfunction line {i}: expected {width} integers, got {len(ln)}")
        vals = [int(t) for t in ln]
        subs.append(Subfunction.from_table(vals[:K + 1], vals[K + 1:]))
    return MkLandscape(n, subs, name=f"nkq-n{n}-K{K}-Q{Q}-s{seed}", nkq_params=(n, K, Q, seed))


def digest(landscape: MkLandscape) -> str:
    """SHA-256 over a canonical rendering of the landscape."""
    h = hashlib.sha256()
    h.update(f"{landscape.n}\n".encode())
    for sf in landscape.subfunctions:
        h.update(repr((sf.vars, sf.table, sf.negated, sf.weight)).encode())
    return h.hexdigest()


def load_instance(path: str | Path) -> MkLandscape:
    """Load an NKQ (``.nkq``), DIMACS CNF (``.cnf``) or WCNF (``.wcnf``) file."""
    from .maxsat import parse_maxsat

    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".nkq":
        land = loads_nkq(path.read_text())
    elif suffix in (".cnf", ".wcnf"):
        with open(path, "rb") as fh:
            land = parse_maxsat(fh, suffix[1:])
    else:
        raise ValueError(f"unknown instance format: {path.name}")
    land.name = path.stem
    return land
