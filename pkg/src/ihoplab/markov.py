"""Markov chain utilities for query sequences.

Transition matrices are column-stochastic throughout the package: column j
holds the distribution of the next state given current state j, so a step is
p_next = F @ p.
"""

from __future__ import annotations

import numpy as np


def check_transition_matrix(trans: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    trans = np.asarray(trans, dtype=np.float64)
    if trans.ndim != 2 or trans.shape[0] != trans.shape[1]:
        raise ValueError("transition matrix must be square")
    if trans.shape[0] == 0:
        raise ValueError("transition matrix is empty")
    if np.any(trans < 0):
        raise ValueError("transition matrix has negative entries")
    colsums = trans.sum(axis=0)
    if np.any(np.abs(colsums - 1.0) > tol):
        raise ValueError("transition matrix columns must sum to 1")
    return trans


def stationary_distribution(
    trans: np.ndarray, tol: float = 1e-12, max_iters: int = 100_000
) -> np.ndarray:
    """Stationary distribution by power iteration from the uniform vector.

    Raises if the residual max|F pi - pi| does not drop below tol within the
    iteration cap, e.g. for periodic chains with no symmetry to rescue them.
    """
    trans = check_transition_matrix(trans)
    n = trans.shape[0]
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iters):
        nxt = trans @ pi
        total = nxt.sum()
        if total <= 0:
            raise ValueError("transition matrix lost all mass")
        nxt /= total
        if np.max(np.abs(nxt - pi)) <= tol:
            return nxt
        pi = nxt
    raise ValueError(
        f"power iteration did not reach tol={tol} in {max_iters} iterations"
    )


def sample_queries_iid(freqs: np.ndarray, count: int, rng) -> np.ndarray:
    """Draw count independent keyword indices from the given distribution."""
    freqs = np.asarray(freqs, dtype=np.float64)
    if freqs.ndim != 1 or freqs.size == 0:
        raise ValueError("frequency vector must be 1-d and nonempty")
    if np.any(freqs < 0) or abs(freqs.sum() - 1.0) > 1e-9:
        raise ValueError("frequencies must be a distribution")
    if count < 0:
        raise ValueError("count must be nonnegative")
    rng = np.random.default_rng(rng)
    cum = np.cumsum(freqs)
    cum[-1] = 1.0
    return np.searchsorted(cum, rng.random(count), side="right").astype(np.int64)


def sample_queries_markov(trans: np.ndarray, count: int, rng) -> np.ndarray:
    """Sample a query sequence from the chain, started at its stationary
    distribution so that marginal frequencies match it from the first query."""
    trans = check_transition_matrix(trans)
    if count < 0:
        raise ValueError("count must be nonnegative")
    rng = np.random.default_rng(rng)
    out = np.empty(count, dtype=np.int64)
    if count == 0:
        return out
    start = stationary_distribution(trans)
    cum_start = np.cumsum(start)
    cum_start[-1] = 1.0
    cum = np.cumsum(trans, axis=0)
    cum[-1, :] = 1.0
    draws = rng.random(count)
    state = int(np.searchsorted(cum_start, draws[0], side="right"))
    out[0] = state
    for r in range(1, count):
        state = int(np.searchsorted(cum[:, state], draws[r], side="right"))
        out[r] = state
    return out
