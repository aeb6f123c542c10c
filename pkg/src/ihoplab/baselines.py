"""Non-iterative query-recovery baselines.

sap_attack solves a single linear assignment over normalized volume and
frequency costs.  freq_attack matches each token to the keyword with the
nearest auxiliary frequency.  ikk_attack anneals a full permutation against
the auxiliary co-occurrence matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import use_numba
from .coeffs import IidFreqCoefficients, SumCoefficients, VolumeCoefficients
from .ihop import solve_linear_step
from .stats import AuxStats, LeakageStats


def sap_attack(
    leakage: LeakageStats,
    aux: AuxStats,
    alpha: float = 0.5,
    flip_absence_term: bool = False,
) -> np.ndarray:
    """One linear assignment over alpha-weighted frequency and volume costs.

    Costs are normalized per observation (frequency costs by the query count,
    volume costs by the collection size) so alpha balances the two channels
    on a common scale.  Without observed queries the frequency channel is
    dropped and alpha is ignored.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError("alpha must lie in [0, 1]")
    if leakage.volume is None or aux.volume is None:
        raise ValueError("volume statistics are required")
    providers = [
        VolumeCoefficients(
            leakage.volume, aux.volume, leakage.num_docs, flip_absence_term
        )
    ]
    weights = [(1.0 - alpha) / leakage.num_docs]
    if leakage.query_count > 0:
        if leakage.freq is None or aux.freq is None:
            raise ValueError("frequency statistics are required when queries exist")
        providers.append(
            IidFreqCoefficients(leakage.freq, aux.freq, leakage.query_count)
        )
        weights.append(alpha / leakage.query_count)
    else:
        weights = [1.0 / leakage.num_docs]
    provider = SumCoefficients(providers, weights)
    n = provider.num_keywords
    m = provider.num_tokens
    empty = np.empty(0, dtype=np.int64)
    return solve_linear_step(
        provider, np.arange(n, dtype=np.int64), np.arange(m, dtype=np.int64),
        empty, empty,
    )


def freq_attack(freq_obs: np.ndarray, freq_aux: np.ndarray) -> np.ndarray:
    """Nearest-frequency match per token, ties to the lowest keyword index.

    Not injective: several tokens may land on the same keyword.
    """
    f = np.asarray(freq_obs, dtype=np.float64)
    ft = np.asarray(freq_aux, dtype=np.float64)
    if f.ndim != 1 or ft.ndim != 1 or f.size == 0 or ft.size == 0:
        raise ValueError("frequency vectors must be 1-d and nonempty")
    return np.abs(f[:, None] - ft[None, :]).argmin(axis=1).astype(np.int64)


@dataclass(frozen=True)
class IkkConfig:
    t0: float = 100.0
    cooling: float = 0.99995
    t_min: float = 1e-10
    seed: int = 0

    def validate(self) -> None:
        if self.t0 <= 0 or self.t_min <= 0 or self.t_min > self.t0:
            raise ValueError("need 0 < t_min <= t0")
        if not (0.0 < self.cooling < 1.0):
            raise ValueError("cooling must lie strictly between 0 and 1")

    def num_steps(self) -> int:
        return int(math.ceil(math.log(self.t_min / self.t0) / math.log(self.cooling))) + 1


def ikk_attack(
    vol_obs: np.ndarray, vol_aux: np.ndarray, config: IkkConfig = IkkConfig()
) -> np.ndarray:
    """Simulated annealing on the squared mismatch between the auxiliary
    co-occurrence matrix and the observed one under the candidate map.

    Moves reassign a random token to a random other keyword, swapping when
    that keyword is taken; worse moves pass with probability exp(-delta/T).
    Energy deltas are evaluated incrementally on the two affected rows, and
    the best state ever seen is returned.
    """
    config.validate()
    vol_obs = np.ascontiguousarray(vol_obs, dtype=np.float64)
    vol_aux = np.ascontiguousarray(vol_aux, dtype=np.float64)
    if vol_obs.ndim != 2 or vol_obs.shape[0] != vol_obs.shape[1]:
        raise ValueError("observed volume must be square")
    if vol_aux.ndim != 2 or vol_aux.shape[0] != vol_aux.shape[1]:
        raise ValueError("auxiliary volume must be square")
    m = vol_obs.shape[0]
    n = vol_aux.shape[0]
    if n < m:
        raise ValueError(f"need at least as many keywords as tokens, {n} < {m}")
    if m == 0:
        raise ValueError("no tokens to assign")
    rng = np.random.default_rng(config.seed)
    assign0 = rng.permutation(n)[:m].astype(np.int64)
    if n < 2:
        return assign0
    steps = config.num_steps()
    u_tok = rng.random(steps)
    u_kw = rng.random(steps)
    u_acc = rng.random(steps)
    if use_numba():
        from . import _ikk_numba

        best, _ = _ikk_numba.anneal(
            vol_obs, vol_aux, assign0, config.t0, config.cooling, config.t_min,
            u_tok, u_kw, u_acc,
        )
        return best
    best, _ = _anneal_python(
        vol_obs, vol_aux, assign0, config.t0, config.cooling, config.t_min,
        u_tok, u_kw, u_acc,
    )
    return best


def _anneal_python(vol_obs, vol_aux, assign0, t0, cooling, t_min, u_tok, u_kw, u_acc):
    """Pure-python twin of the annealing kernel; consumes the same random
    streams, so it follows the identical trajectory."""
    m = assign0.shape[0]
    n = vol_aux.shape[0]
    assign = assign0.copy()
    owner = np.full(n, -1, dtype=np.int64)
    owner[assign] = np.arange(m)
    # sequential accumulation in kernel order, so both backends track the
    # exact same energy values
    energy = 0.0
    for a in range(m):
        for b in range(m):
            d = vol_aux[assign[a], assign[b]] - vol_obs[a, b]
            energy += d * d
    best_energy = energy
    best = assign.copy()
    temp = t0
    for step in range(u_tok.shape[0]):
        if temp <= t_min:
            break
        j = min(int(u_tok[step] * m), m - 1)
        cur = int(assign[j])
        k = min(int(u_kw[step] * (n - 1)), n - 2)
        if k >= cur:
            k += 1
        j2 = int(owner[k])
        delta = 0.0
        for b in range(m):
            if b == j or b == j2:
                continue
            pb = assign[b]
            vob = vol_obs[j, b]
            dn = vol_aux[k, pb] - vob
            do = vol_aux[cur, pb] - vob
            delta += 2.0 * (dn * dn - do * do)
            if j2 >= 0:
                vob2 = vol_obs[j2, b]
                dn2 = vol_aux[cur, pb] - vob2
                do2 = vol_aux[k, pb] - vob2
                delta += 2.0 * (dn2 * dn2 - do2 * do2)
        dn = vol_aux[k, k] - vol_obs[j, j]
        do = vol_aux[cur, cur] - vol_obs[j, j]
        delta += dn * dn - do * do
        if j2 >= 0:
            dn = vol_aux[cur, cur] - vol_obs[j2, j2]
            do = vol_aux[k, k] - vol_obs[j2, j2]
            delta += dn * dn - do * do
            vjj2 = vol_obs[j, j2]
            dn = vol_aux[k, cur] - vjj2
            do = vol_aux[cur, k] - vjj2
            delta += 2.0 * (dn * dn - do * do)
        if delta <= 0.0 or u_acc[step] < math.exp(-delta / temp):
            assign[j] = k
            owner[k] = j
            owner[cur] = -1
            if j2 >= 0:
                assign[j2] = cur
                owner[cur] = j2
            energy += delta
            if energy < best_energy:
                best_energy = energy
                best[:] = assign
        temp *= cooling
    return best, best_energy
