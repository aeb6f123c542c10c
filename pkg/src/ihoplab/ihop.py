"""Iterative query recovery through alternating fixed/free assignment solves.

The full recovery problem is quadratic: a candidate map is scored by linear
per-token costs plus pair costs between every two mapped tokens.  The solver
walks toward a good map by repeatedly freezing most of its current guess,
re-solving the remaining tokens as a linear assignment against the frozen
pairs, and merging the result back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coeffs import (
    IidFreqCoefficients,
    MarkovCoefficients,
    SumCoefficients,
    VolumeCoefficients,
)
from .lap import solve_lap_min
from .markov import stationary_distribution
from .stats import AuxStats, LeakageStats, smooth_freq, smooth_trans

COEFFICIENT_MODES = ("volume", "freq_iid", "markov", "volume+freq_iid", "pancake")


@dataclass(frozen=True)
class IhopConfig:
    n_iters: int = 1000
    p_free: float = 0.25
    seed: int = 0
    coefficient_mode: str = "volume"
    flip_absence_term: bool = False
    scalar_free_count: bool = False

    def validate(self) -> None:
        if self.n_iters < 0:
            raise ValueError("n_iters must be nonnegative")
        if not (0.0 < self.p_free < 1.0):
            raise ValueError("p_free must lie strictly between 0 and 1")
        if self.coefficient_mode not in COEFFICIENT_MODES:
            raise ValueError(
                f"coefficient_mode must be one of {COEFFICIENT_MODES}, "
                f"got {self.coefficient_mode!r}"
            )


def build_provider(leakage: LeakageStats, aux: AuxStats, config: IhopConfig):
    """Coefficient provider for the configured leakage channels."""
    mode = config.coefficient_mode
    if mode in ("volume", "volume+freq_iid"):
        if leakage.volume is None or aux.volume is None:
            raise ValueError(f"mode {mode!r} needs volume statistics")
    if mode in ("freq_iid", "volume+freq_iid"):
        if leakage.freq is None or aux.freq is None:
            raise ValueError(f"mode {mode!r} needs frequency statistics")
        if leakage.query_count <= 0:
            raise ValueError(f"mode {mode!r} needs observed queries")
    if mode in ("markov", "pancake"):
        if leakage.trans is None or aux.trans is None:
            raise ValueError(f"mode {mode!r} needs transition statistics")

    if mode == "volume":
        return VolumeCoefficients(
            leakage.volume, aux.volume, leakage.num_docs, config.flip_absence_term
        )
    if mode == "freq_iid":
        return IidFreqCoefficients(leakage.freq, aux.freq, leakage.query_count)
    if mode == "volume+freq_iid":
        return SumCoefficients(
            [
                VolumeCoefficients(
                    leakage.volume,
                    aux.volume,
                    leakage.num_docs,
                    config.flip_absence_term,
                ),
                IidFreqCoefficients(leakage.freq, aux.freq, leakage.query_count),
            ]
        )
    # markov and pancake share the machinery; pancake feeds the predicted
    # replica-level transition matrix as the auxiliary chain
    return MarkovCoefficients(
        leakage.trans,
        aux.trans,
        leakage.token_counts,
        aux_weights=stationary_distribution(aux.trans),
        scalar_free_count=config.scalar_free_count,
    )


def solve_linear_step(provider, free_kws, free_toks, fixed_kws, fixed_toks):
    """One assignment solve of the free block against the fixed pairs.

    Returns the keyword chosen for each free token, aligned with free_toks.
    """
    free_kws = np.asarray(free_kws, dtype=np.int64)
    free_toks = np.asarray(free_toks, dtype=np.int64)
    fixed_kws = np.asarray(fixed_kws, dtype=np.int64)
    fixed_toks = np.asarray(fixed_toks, dtype=np.int64)
    if free_toks.size == 0:
        return np.empty(0, dtype=np.int64)
    if free_kws.size < free_toks.size:
        raise ValueError("not enough free keywords for the free tokens")
    cost = provider.linear_costs(free_kws, free_toks)
    cost = cost + provider.fixed_pair_costs(free_kws, free_toks, fixed_kws, fixed_toks)
    rows = solve_lap_min(cost)
    return free_kws[rows]


def ihop_run(
    leakage: LeakageStats,
    aux: AuxStats,
    config: IhopConfig,
    provider=None,
) -> np.ndarray:
    """Run the iterative attack and return the token -> keyword map.

    Starts from a pure linear assignment over everything, then for n_iters
    rounds frees a random ceil(p_free * m) token subset, re-solves it against
    the pair costs of the frozen remainder, and merges.  Deterministic given
    the config seed.
    """
    config.validate()
    if provider is None:
        provider = build_provider(leakage, aux, config)
    n = provider.num_keywords
    m = provider.num_tokens
    if n < m:
        raise ValueError(f"need at least as many keywords as tokens, {n} < {m}")
    rng = np.random.default_rng(config.seed)
    all_kws = np.arange(n, dtype=np.int64)
    all_toks = np.arange(m, dtype=np.int64)
    empty = np.empty(0, dtype=np.int64)
    assign = solve_linear_step(provider, all_kws, all_toks, empty, empty)
    k_free = min(m, math.ceil(config.p_free * m))
    for _ in range(config.n_iters):
        free_toks = np.sort(rng.permutation(m)[:k_free])
        fixed_mask = np.ones(m, dtype=bool)
        fixed_mask[free_toks] = False
        fixed_toks = all_toks[fixed_mask]
        fixed_kws = assign[fixed_toks]
        kw_taken = np.zeros(n, dtype=bool)
        kw_taken[fixed_kws] = True
        free_kws = all_kws[~kw_taken]
        assign[free_toks] = solve_linear_step(
            provider, free_kws, free_toks, fixed_kws, fixed_toks
        )
    return assign


def qap_objective(provider, assign) -> float:
    """Total quadratic objective of a full map under a provider: linear costs
    on the diagonal plus pair costs over every ordered token pair.

    Exhaustive and slow; meant for small-instance verification.
    """
    assign = np.asarray(assign, dtype=np.int64)
    m = assign.size
    toks = np.arange(m, dtype=np.int64)
    total = float(
        np.trace(provider.linear_costs(assign, toks))
    ) if m else 0.0
    for j in range(m):
        others = toks[toks != j]
        pair = provider.fixed_pair_costs(
            assign[j : j + 1], toks[j : j + 1], assign[others], others
        )
        total += float(pair[0, 0])
    return total
