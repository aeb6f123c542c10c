"""Rectangular linear assignment.

solve_lap_min takes an (n, m) cost matrix with n >= m and returns, for each
column, the row assigned to it so that the total cost is minimal and no row
is used twice.  Columns are the observed tokens, rows the candidate keywords.

The solver is a shortest-augmenting-path method with dual potentials, run on
the transposed matrix so the outer loop walks the smaller dimension.  Ties
inside the Dijkstra scan are broken deterministically: the first column in
scan order wins, except that an unassigned column beats assigned ones at
equal cost.  The numba kernel and the vectorized numpy fallback follow the
same tie rule and the same floating-point operation order, so they return
bit-identical assignments.
"""

from __future__ import annotations

import functools
import itertools

import numpy as np

from ._backend import use_numba

BRUTE_FORCE_LIMIT = 8


def _check_cost(cost: np.ndarray) -> np.ndarray:
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError("cost matrix must be 2-d")
    n, m = cost.shape
    if m == 0 or n == 0:
        raise ValueError("cost matrix must be nonempty")
    if n < m:
        raise ValueError(f"need at least as many rows as columns, got {n} < {m}")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must be finite")
    return cost


def solve_lap_min(cost: np.ndarray) -> np.ndarray:
    """Minimum-cost injective assignment of columns to rows.

    Returns an integer array `rows` of length m with rows[j] the row given to
    column j; all returned rows are distinct.
    """
    cost = _check_cost(cost)
    costT = np.ascontiguousarray(cost.T)
    if use_numba():
        from . import _lap_numba

        assign = _lap_numba.augmenting_path_solve(costT)
    else:
        assign = _augmenting_path_numpy(costT)
    return assign


def _augmenting_path_numpy(cost: np.ndarray) -> np.ndarray:
    """Pure-numpy twin of the kernel: cost is (nr, nc) with nr <= nc, returns
    col4row, the column matched to each row."""
    nr, nc = cost.shape
    u = np.zeros(nr)
    v = np.zeros(nc)
    col4row = np.full(nr, -1, dtype=np.int64)
    row4col = np.full(nc, -1, dtype=np.int64)
    for cur in range(nr):
        shortest = np.full(nc, np.inf)
        path = np.full(nc, -1, dtype=np.int64)
        scanned_rows = np.zeros(nr, dtype=bool)
        scanned_cols = np.zeros(nc, dtype=bool)
        remaining = np.arange(nc, dtype=np.int64)
        num_remaining = nc
        minval = 0.0
        i = cur
        sink = -1
        while sink == -1:
            scanned_rows[i] = True
            rem = remaining[:num_remaining]
            # same operation order as the kernel: ((minval + c) - u) - v
            reduced = ((minval + cost[i, rem]) - u[i]) - v[rem]
            improved = reduced < shortest[rem]
            upd = rem[improved]
            shortest[upd] = reduced[improved]
            path[upd] = i
            vals = shortest[rem]
            lowest = vals.min()
            tie = vals == lowest
            open_tie = tie & (row4col[rem] == -1)
            pos = int(np.argmax(open_tie)) if open_tie.any() else int(np.argmax(tie))
            minval = float(lowest)
            j = int(remaining[pos])
            if row4col[j] == -1:
                sink = j
            else:
                i = int(row4col[j])
            scanned_cols[j] = True
            num_remaining -= 1
            remaining[pos] = remaining[num_remaining]
        u[cur] += minval
        other = scanned_rows.copy()
        other[cur] = False
        if other.any():
            u[other] += minval - shortest[col4row[other]]
        v[scanned_cols] -= minval - shortest[scanned_cols]
        j = sink
        while True:
            i = int(path[j])
            row4col[j] = i
            nxt = col4row[i]
            col4row[i] = j
            if i == cur:
                break
            j = int(nxt)
    return col4row


def solve_lap_bruteforce(cost: np.ndarray) -> np.ndarray:
    """Exhaustive reference solver for small instances.

    Enumerates every injective column -> row map; intended as the oracle the
    fast solver is checked against, so it shares no code with it.
    """
    cost = _check_cost(cost)
    n, m = cost.shape
    if m > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_LIMIT} columns")
    # all P(n, m) injective maps at once; one gather instead of a python loop
    totals = cost[_perm_table(n, m), np.arange(m)].sum(axis=1)
    return _perm_table(n, m)[int(totals.argmin())]


@functools.lru_cache(maxsize=None)
def _perm_table(n: int, m: int) -> np.ndarray:
    out = np.array(list(itertools.permutations(range(n), m)), dtype=np.int64)
    out.setflags(write=False)
    return out


def lap_objective(cost: np.ndarray, rows: np.ndarray) -> float:
    rows = np.asarray(rows, dtype=np.int64)
    return float(cost[rows, np.arange(rows.size)].sum())


def enumerate_assignment_costs(cost: np.ndarray):
    """Yield (assignment, total) over all injective column -> row maps."""
    cost = _check_cost(cost)
    n, m = cost.shape
    if m > BRUTE_FORCE_LIMIT:
        raise ValueError(f"enumeration capped at {BRUTE_FORCE_LIMIT} columns")
    cols = np.arange(m)
    for perm in itertools.permutations(range(n), m):
        yield np.asarray(perm, dtype=np.int64), float(cost[perm, cols].sum())


def lap_selftest(num_instances: int = 1000, seed: int = 0, max_rows: int = 9,
                 max_cols: int = 7) -> dict:
    """Randomized agreement check between the fast solver and brute force.

    Draws rectangular instances with small real and integer costs and compares
    achieved objectives exactly (integer costs) or to 1e-9 (real costs).
    Returns counters; any mismatch lands in `failures`.
    """
    rng = np.random.default_rng(seed)
    failures = 0
    checked = 0
    for k in range(num_instances):
        m = int(rng.integers(1, max_cols + 1))
        n = int(rng.integers(m, max_rows + 1))
        if k % 2 == 0:
            cost = rng.normal(size=(n, m)) * 10.0
            tol = 1e-9
        else:
            cost = rng.integers(-20, 21, size=(n, m)).astype(np.float64)
            tol = 0.0
        fast = solve_lap_min(cost)
        ref = solve_lap_bruteforce(cost)
        checked += 1
        gap = abs(lap_objective(cost, fast) - lap_objective(cost, ref))
        if gap > tol or not np.unique(fast).size == m:
            failures += 1
    return {"instances": checked, "failures": failures}
