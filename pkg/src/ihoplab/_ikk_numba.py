"""numba kernel for the annealed volume-matching baseline."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def anneal(
    vol_obs,
    vol_aux,
    assign0,
    t0,
    cooling,
    t_min,
    u_tok,
    u_kw,
    u_acc,
):
    m = assign0.shape[0]
    n = vol_aux.shape[0]
    assign = assign0.copy()
    owner = np.full(n, -1, np.int64)
    for j in range(m):
        owner[assign[j]] = j
    energy = 0.0
    for a in range(m):
        for b in range(m):
            d = vol_aux[assign[a], assign[b]] - vol_obs[a, b]
            energy += d * d
    best_energy = energy
    best = assign.copy()
    temp = t0
    steps = u_tok.shape[0]
    for step in range(steps):
        if temp <= t_min:
            break
        j = int(u_tok[step] * m)
        if j >= m:
            j = m - 1
        cur = assign[j]
        k = int(u_kw[step] * (n - 1))
        if k >= n - 1:
            k = n - 2
        if k >= cur:
            k += 1
        j2 = owner[k]
        # energy delta from moving token j to keyword k (swapping with the
        # token j2 currently on k, if any); only rows/columns of j and j2
        # change, and both matrices are symmetric
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
