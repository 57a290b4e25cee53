"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with ``numba.njit`` and a
pure numpy version.  The numba path is used when numba imports and the
environment variable ``GRAYBOX_NUMBA`` is not set to ``0``.  Both paths take
the flat landscape arrays produced by :class:`graybox.landscape.MkLandscape`
and must return identical integers.

Landscape arrays (``m`` subfunctions, ``n`` variables):

``sub_ptr``   int64[m+1]  offsets of each subfunction's variables in ``sub_vars``
``sub_vars``  int64[*]    variable indices, first variable is the most
                          significant bit of the table index
``sub_neg``   uint8[*]    clause polarity per literal (1 = negated)
``sub_shift`` int64[*]    bit position of each variable in the table index
``kind``      uint8[m]    0 = lookup table, 1 = weighted clause
``tab_ptr``   int64[m]    offset of each table in ``tables``
``tables``    int64[*]    concatenated tables
``weights``   int64[m]    clause weights (0 for tables)
``var_ptr``   int64[n+1]  offsets into ``var_subs``
``var_subs``  int64[*]    subfunctions incident to each variable
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

USE_NUMBA = numba is not None and os.environ.get("GRAYBOX_NUMBA", "1") != "0"
BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(fn):
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# numba loop kernels
# ---------------------------------------------------------------------------


# Two small helpers instead of one branching helper: LLVM inlines these,
# which drops the per-call array refcounting numba adds around calls.
@_njit
def _table_value(l, z, sub_ptr, sub_vars, tab_ptr, tables):
    idx = 0
    for p in range(sub_ptr[l], sub_ptr[l + 1]):
        idx = (idx << 1) | z[sub_vars[p]]
    return tables[tab_ptr[l] + idx]


@_njit
def _clause_value(l, z, sub_ptr, sub_vars, sub_neg, weights):
    for p in range(sub_ptr[l], sub_ptr[l + 1]):
        if z[sub_vars[p]] != sub_neg[p]:
            return weights[l]
    return weights[l] * 0


@_njit
def _values_loop(z, sub_ptr, sub_vars, sub_neg, kind, tab_ptr, tables, weights):
    m = kind.shape[0]
    out = np.empty(m, dtype=np.int64)
    for l in range(m):
        if kind[l] == 0:
            out[l] = _table_value(l, z, sub_ptr, sub_vars, tab_ptr, tables)
        else:
            out[l] = _clause_value(l, z, sub_ptr, sub_vars, sub_neg, weights)
    return out


@_njit
def _evaluate_loop(z, sub_ptr, sub_vars, sub_neg, kind, tab_ptr, tables, weights):
    total = 0
    for l in range(kind.shape[0]):
        if kind[l] == 0:
            total += _table_value(l, z, sub_ptr, sub_vars, tab_ptr, tables)
        else:
            total += _clause_value(l, z, sub_ptr, sub_vars, sub_neg, weights)
    return total


@_njit
def _evaluate_rows_loop(zs, sub_ptr, sub_vars, sub_neg, kind, tab_ptr, tables, weights):
    out = np.empty(zs.shape[0], dtype=np.int64)
    for r in range(zs.shape[0]):
        out[r] = _evaluate_loop(zs[r], sub_ptr, sub_vars, sub_neg, kind, tab_ptr, tables, weights)
    return out


@_njit
def _score_configs_loop(x, cvars, flips, subs, sub_ptr, sub_vars, sub_neg, kind, tab_ptr,
                        tables, weights):
    z = x.copy()
    nconf = flips.shape[0]
    c = cvars.shape[0]
    out = np.zeros(nconf, dtype=np.int64)
    for r in range(nconf):
        for p in range(c):
            z[cvars[p]] = x[cvars[p]] ^ flips[r, p]
        acc = 0
        for q in range(subs.shape[0]):
            if kind[subs[q]] == 0:
                acc += _table_value(subs[q], z, sub_ptr, sub_vars, tab_ptr, tables)
            else:
                acc += _clause_value(subs[q], z, sub_ptr, sub_vars, sub_neg, weights)
        out[r] = acc
    return out


@_njit
def _flip_delta(v, z, var_ptr, var_subs, sub_ptr, sub_vars, sub_neg, kind, tab_ptr, tables,
                weights):
    before = 0
    for p in range(var_ptr[v], var_ptr[v + 1]):
        if kind[var_subs[p]] == 0:
            before += _table_value(var_subs[p], z, sub_ptr, sub_vars, tab_ptr, tables)
        else:
            before += _clause_value(var_subs[p], z, sub_ptr, sub_vars, sub_neg, weights)
    z[v] ^= 1
    after = 0
    for p in range(var_ptr[v], var_ptr[v + 1]):
        if kind[var_subs[p]] == 0:
            after += _table_value(var_subs[p], z, sub_ptr, sub_vars, tab_ptr, tables)
        else:
            after += _clause_value(var_subs[p], z, sub_ptr, sub_vars, sub_neg, weights)
    z[v] ^= 1
    return after - before


@_njit
def _hill_climb_loop(z, perm, vig_ptr, vig_idx, var_ptr, var_subs, sub_ptr, sub_vars, sub_neg,
                     kind, tab_ptr, tables, weights):
    n = z.shape[0]
    score = np.empty(n, dtype=np.int64)
    improving = 0
    for v in range(n):
        score[v] = _flip_delta(v, z, var_ptr, var_subs, sub_ptr, sub_vars, sub_neg, kind,
                               tab_ptr, tables, weights)
        if score[v] > 0:
            improving += 1
    moves = 0
    pos = 0
    while improving > 0:
        # cyclic scan of the fixed permutation, resuming where the last move happened
        while score[perm[pos]] <= 0:
            pos += 1
            if pos == n:
                pos = 0
        v = perm[pos]
        z[v] ^= 1
        moves += 1
        score[v] = -score[v]
        improving -= 1
        for p in range(vig_ptr[v], vig_ptr[v + 1]):
            u = vig_idx[p]
            old = score[u]
            new = _flip_delta(u, z, var_ptr, var_subs, sub_ptr, sub_vars, sub_neg, kind,
                              tab_ptr, tables, weights)
            score[u] = new
            if old > 0 and new <= 0:
                improving -= 1
            elif old <= 0 and new > 0:
                improving += 1
    return moves


# ---------------------------------------------------------------------------
# numpy fallbacks
# ---------------------------------------------------------------------------


def _values_np(zs, sub_ptr, sub_vars, sub_neg, sub_shift, kind, tab_ptr, tables, weights):
    """Subfunction values for a (rows, n) matrix of solutions -> (rows, m)."""
    bits = zs[:, sub_vars].astype(np.int64)
    starts = sub_ptr[:-1]
    idx = np.add.reduceat(bits << sub_shift, starts, axis=1)
    sat = np.logical_or.reduceat(bits != sub_neg, starts, axis=1)
    is_table = kind == 0
    safe = np.where(is_table, tab_ptr, 0) + np.where(is_table, idx, 0)
    return np.where(is_table, tables[safe], np.where(sat, weights, 0))


def _score_configs_np(x, cvars, flips, subs, sub_ptr, sub_vars, sub_neg, sub_shift, kind,
                      tab_ptr, tables, weights):
    if subs.shape[0] == 0:
        return np.zeros(flips.shape[0], dtype=np.int64)
    zs = np.repeat(x[None, :], flips.shape[0], axis=0)
    zs[:, cvars] ^= flips
    lens = sub_ptr[subs + 1] - sub_ptr[subs]
    flat = np.concatenate([np.arange(sub_ptr[s], sub_ptr[s + 1]) for s in subs])
    ptr = np.concatenate(([0], np.cumsum(lens)))
    vals = _values_np(zs, ptr, sub_vars[flat], sub_neg[flat], sub_shift[flat], kind[subs],
                      tab_ptr[subs], tables, weights[subs])
    return vals.sum(axis=1)


def _hill_climb_np(z, perm, vig_ptr, vig_idx, var_ptr, var_subs, sub_ptr, sub_vars, sub_neg,
                   sub_shift, kind, tab_ptr, tables, weights):
    n = z.shape[0]
    arrays = (sub_ptr, sub_vars, sub_neg, sub_shift, kind, tab_ptr, tables, weights)

    def deltas(vs):
        # every neighbour of z along vs, evaluated in one batch
        if len(vs) == 0:
            return np.zeros(0, dtype=np.int64)
        zs = np.repeat(z[None, :], len(vs) + 1, axis=0)
        zs[np.arange(1, len(vs) + 1), vs] ^= 1
        totals = _values_np(zs, *arrays).sum(axis=1)
        return totals[1:] - totals[0]

    score = deltas(np.arange(n))
    moves = 0
    pos = 0
    while (score > 0).any():
        while score[perm[pos]] <= 0:
            pos = (pos + 1) % n
        v = perm[pos]
        z[v] ^= 1
        moves += 1
        nb = vig_idx[vig_ptr[v]:vig_ptr[v + 1]]
        score[v] = -score[v]
        score[nb] = deltas(nb)
    return moves


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def subfunction_values(la, z):
    if USE_NUMBA:
        return _values_loop(z, la.sub_ptr, la.sub_vars, la.sub_neg, la.kind, la.tab_ptr,
                            la.tables, la.weights)
    return _values_np(z[None, :], la.sub_ptr, la.sub_vars, la.sub_neg, la.sub_shift, la.kind,
                      la.tab_ptr, la.tables, la.weights)[0]


def evaluate(la, z):
    if USE_NUMBA:
        return int(_evaluate_loop(z, la.sub_ptr, la.sub_vars, la.sub_neg, la.kind, la.tab_ptr,
                                  la.tables, la.weights))
    return int(subfunction_values(la, z).sum())


def evaluate_rows(la, zs):
    if USE_NUMBA:
        return _evaluate_rows_loop(zs, la.sub_ptr, la.sub_vars, la.sub_neg, la.kind,
                                   la.tab_ptr, la.tables, la.weights)
    return _values_np(zs, la.sub_ptr, la.sub_vars, la.sub_neg, la.sub_shift, la.kind,
                      la.tab_ptr, la.tables, la.weights).sum(axis=1)


def score_configs(la, x, cvars, flips, subs):
    """Sum of subfunctions ``subs`` at ``x`` with ``cvars`` flipped per row of ``flips``."""
    if USE_NUMBA:
        return _score_configs_loop(x, cvars, flips, subs, la.sub_ptr, la.sub_vars, la.sub_neg,
                                   la.kind, la.tab_ptr, la.tables, la.weights)
    return _score_configs_np(x, cvars, flips, subs, la.sub_ptr, la.sub_vars, la.sub_neg,
                             la.sub_shift, la.kind, la.tab_ptr, la.tables, la.weights)


def hill_climb(la, vig, z, perm):
    """First-improvement climb of ``z`` in place; returns the number of moves."""
    if USE_NUMBA:
        return int(_hill_climb_loop(z, perm, vig.indptr, vig.indices, la.var_ptr, la.var_subs,
                                    la.sub_ptr, la.sub_vars, la.sub_neg, la.kind, la.tab_ptr,
                                    la.tables, la.weights))
    return _hill_climb_np(z, perm, vig.indptr, vig.indices, la.var_ptr, la.var_subs, la.sub_ptr,
                          la.sub_vars, la.sub_neg, la.sub_shift, la.kind, la.tab_ptr, la.tables,
                          la.weights)
