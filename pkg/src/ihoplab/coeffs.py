"""Assignment cost coefficients for the query-recovery attacks.

Each coefficient family scores candidate token -> keyword matches by the
negative log-likelihood of an observed statistic under the auxiliary
estimate, keeping only summands that depend on the candidate pair:

  volume    the number of documents matching a token (and a token pair) is
            binomial with the auxiliary co-occurrence probability as success
            rate, so the linear cost is
              -N_d * (v_jj * log(vt_ii) + (1 - v_jj) * log(1 - vt_ii))
            and the pair cost is the same expression on off-diagonal entries.
  freq_iid  token counts are Poisson in the query budget, giving
              -rho * f_j * log(ft_i).
  markov    successor counts are Poisson in per-token query counts; a token's
            transitions into the fixed set are scored pairwise and its
            transitions into the rest of the free set through a single
            aggregate pseudo-token.

Providers expose the same two calls the solver needs: a linear block over the
free sets and the aggregated pair block against the currently fixed pairs.
Free sets are passed to both because the aggregate pseudo-token makes the
markov linear costs depend on which tokens are currently free.
"""

from __future__ import annotations

import numpy as np
from scipy.special import xlogy

from .markov import stationary_distribution


def _as_index(ids) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1:
        raise ValueError("index arrays must be 1-d")
    return ids


def volume_linear_costs(
    vol_obs: np.ndarray,
    vol_aux: np.ndarray,
    num_docs: int,
    flip_absence_term: bool = False,
) -> np.ndarray:
    """Full (n, m) linear volume costs, keywords on rows.

    flip_absence_term subtracts the co-absence summand instead of adding it;
    the default adds it, matching the binomial log-likelihood.
    """
    v = np.diag(np.asarray(vol_obs, dtype=np.float64))
    vt = np.diag(np.asarray(vol_aux, dtype=np.float64))
    if np.any(vt <= 0) or np.any(vt >= 1):
        raise ValueError("auxiliary volumes must lie strictly inside (0, 1)")
    present = xlogy(v[None, :], vt[:, None])
    absent = xlogy(1.0 - v[None, :], 1.0 - vt[:, None])
    sign = -1.0 if flip_absence_term else 1.0
    return -float(num_docs) * (present + sign * absent)


def volume_pair_costs(
    vol_obs: np.ndarray,
    vol_aux: np.ndarray,
    num_docs: int,
    free_kws,
    free_toks,
    fixed_kws,
    fixed_toks,
    flip_absence_term: bool = False,
) -> np.ndarray:
    """Pair volume costs against the fixed pairs, aggregated per free pair.

    Entry [a, c] sums the pair cost of (free keyword a, free token c) with
    every fixed (keyword, token) pair, evaluated as two matrix products.
    """
    free_kws = _as_index(free_kws)
    free_toks = _as_index(free_toks)
    fixed_kws = _as_index(fixed_kws)
    fixed_toks = _as_index(fixed_toks)
    if fixed_kws.size != fixed_toks.size:
        raise ValueError("fixed keyword and token lists must align")
    if fixed_kws.size == 0:
        return np.zeros((free_kws.size, free_toks.size))
    vol_obs = np.asarray(vol_obs, dtype=np.float64)
    vol_aux = np.asarray(vol_aux, dtype=np.float64)
    vt = vol_aux[np.ix_(free_kws, fixed_kws)]
    if np.any(vt <= 0) or np.any(vt >= 1):
        raise ValueError("auxiliary volumes must lie strictly inside (0, 1)")
    log_present = np.log(vt)
    log_absent = np.log(1.0 - vt)
    v = vol_obs[np.ix_(free_toks, fixed_toks)]
    sign = -1.0 if flip_absence_term else 1.0
    return -float(num_docs) * (
        log_present @ v.T + sign * (log_absent @ (1.0 - v).T)
    )


def iid_freq_linear_costs(
    freq_obs: np.ndarray, freq_aux: np.ndarray, query_count: int
) -> np.ndarray:
    """Full (n, m) independent-query frequency costs, keywords on rows."""
    f = np.asarray(freq_obs, dtype=np.float64)
    ft = np.asarray(freq_aux, dtype=np.float64)
    if np.any(ft <= 0):
        raise ValueError("auxiliary frequencies must be strictly positive")
    return -float(query_count) * np.outer(np.log(ft), f)


def markov_free_aggregate(
    trans_obs: np.ndarray,
    token_counts: np.ndarray,
    free_toks,
    scalar_free_count: bool = False,
):
    """Observed transition mass from each free token into the other free
    tokens, collapsed into one aggregate successor.

    Returns (agg_prob, agg_count): agg_prob[j] is the count-weighted share of
    free-to-free transitions landing on token j (summing to 1 over the free
    set), agg_count[j] the query count behind the aggregate from j's view,
    namely the total count of the other free tokens.  With
    scalar_free_count=True the count is the same total for every j, the sum
    over the whole free set.  A single free token has no free partners, so
    both come back zero.
    """
    free_toks = _as_index(free_toks)
    trans_obs = np.asarray(trans_obs, dtype=np.float64)
    token_counts = np.asarray(token_counts, dtype=np.float64)
    k = free_toks.size
    sub = trans_obs[np.ix_(free_toks, free_toks)]
    counts = token_counts[free_toks]
    weighted = sub * counts[None, :]
    numer = weighted.sum(axis=1) - np.diag(weighted)
    denom = numer.sum()
    agg_prob = numer / denom if denom > 0 else np.zeros(k)
    total = counts.sum()
    if scalar_free_count:
        agg_count = np.full(k, total)
    else:
        agg_count = total - counts
    if k <= 1:
        agg_count = np.zeros(k)
    return agg_prob, agg_count


def aux_free_aggregate(
    trans_aux: np.ndarray, weights: np.ndarray, free_kws
) -> np.ndarray:
    """Auxiliary counterpart of markov_free_aggregate, with the stationary
    weights standing in for query counts."""
    free_kws = _as_index(free_kws)
    trans_aux = np.asarray(trans_aux, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    sub = trans_aux[np.ix_(free_kws, free_kws)]
    w = weights[free_kws]
    weighted = sub * w[None, :]
    numer = weighted.sum(axis=1) - np.diag(weighted)
    denom = numer.sum()
    return numer / denom if denom > 0 else np.zeros(free_kws.size)


def markov_linear_costs(
    trans_obs: np.ndarray,
    trans_aux: np.ndarray,
    token_counts: np.ndarray,
    aux_weights: np.ndarray,
    free_kws,
    free_toks,
    scalar_free_count: bool = False,
) -> np.ndarray:
    """Linear markov costs over the free block, keywords on rows.

    Scores each candidate pair by the token's self-transition mass against
    the keyword's self-transition probability, plus the token's aggregate
    free-successor mass against the keyword's aggregate.  When the aggregate
    is degenerate (a lone free token or keyword) that summand is zero for
    every candidate and is dropped.
    """
    free_kws = _as_index(free_kws)
    free_toks = _as_index(free_toks)
    trans_obs = np.asarray(trans_obs, dtype=np.float64)
    trans_aux = np.asarray(trans_aux, dtype=np.float64)
    token_counts = np.asarray(token_counts, dtype=np.float64)
    diag_aux = np.diag(trans_aux)[free_kws]
    if np.any(diag_aux <= 0):
        raise ValueError("auxiliary transitions must be strictly positive")
    self_counts = token_counts[free_toks] * np.diag(trans_obs)[free_toks]
    term_self = -np.outer(np.log(diag_aux), self_counts)
    agg_prob, agg_count = markov_free_aggregate(
        trans_obs, token_counts, free_toks, scalar_free_count
    )
    agg_aux = aux_free_aggregate(trans_aux, aux_weights, free_kws)
    agg_mass = agg_count * agg_prob
    with np.errstate(divide="ignore"):
        log_agg = np.where(agg_aux > 0, np.log(np.maximum(agg_aux, 1e-300)), 0.0)
    term_agg = -np.where(
        agg_mass[None, :] > 0, log_agg[:, None] * agg_mass[None, :], 0.0
    )
    return term_self + term_agg


def markov_pair_costs(
    trans_obs: np.ndarray,
    trans_aux: np.ndarray,
    token_counts: np.ndarray,
    free_kws,
    free_toks,
    fixed_kws,
    fixed_toks,
) -> np.ndarray:
    """Pair markov costs against the fixed pairs, aggregated per free pair.

    Both transition directions between a free pair and a fixed pair are
    scored: the free token's successors among the fixed tokens, and the fixed
    tokens' successors hitting the free token.
    """
    free_kws = _as_index(free_kws)
    free_toks = _as_index(free_toks)
    fixed_kws = _as_index(fixed_kws)
    fixed_toks = _as_index(fixed_toks)
    if fixed_kws.size != fixed_toks.size:
        raise ValueError("fixed keyword and token lists must align")
    if fixed_kws.size == 0:
        return np.zeros((free_kws.size, free_toks.size))
    trans_obs = np.asarray(trans_obs, dtype=np.float64)
    trans_aux = np.asarray(trans_aux, dtype=np.float64)
    token_counts = np.asarray(token_counts, dtype=np.float64)
    if np.any(trans_aux[np.ix_(free_kws, fixed_kws)] <= 0) or np.any(
        trans_aux[np.ix_(fixed_kws, free_kws)] <= 0
    ):
        raise ValueError("auxiliary transitions must be strictly positive")
    log_into_fixed = np.log(trans_aux[np.ix_(free_kws, fixed_kws)])
    mass_into_fixed = (
        trans_obs[np.ix_(free_toks, fixed_toks)] * token_counts[fixed_toks][None, :]
    )
    log_from_fixed = np.log(trans_aux[np.ix_(fixed_kws, free_kws)])
    prob_from_fixed = trans_obs[np.ix_(fixed_toks, free_toks)]
    return -(
        log_into_fixed @ mass_into_fixed.T
        + (log_from_fixed.T @ prob_from_fixed) * token_counts[free_toks][None, :]
    )


class VolumeCoefficients:
    """Binomial volume costs: linear on diagonal volumes, pairwise on
    co-occurrence volumes."""

    def __init__(self, vol_obs, vol_aux, num_docs, flip_absence_term=False):
        self.vol_obs = np.asarray(vol_obs, dtype=np.float64)
        self.vol_aux = np.asarray(vol_aux, dtype=np.float64)
        self.num_docs = int(num_docs)
        self.flip_absence_term = bool(flip_absence_term)
        if self.num_docs <= 0:
            raise ValueError("num_docs must be positive")
        self._full_linear = volume_linear_costs(
            self.vol_obs, self.vol_aux, self.num_docs, self.flip_absence_term
        )

    @property
    def num_keywords(self):
        return self.vol_aux.shape[0]

    @property
    def num_tokens(self):
        return self.vol_obs.shape[0]

    def linear_costs(self, free_kws, free_toks):
        return self._full_linear[np.ix_(_as_index(free_kws), _as_index(free_toks))]

    def fixed_pair_costs(self, free_kws, free_toks, fixed_kws, fixed_toks):
        return volume_pair_costs(
            self.vol_obs,
            self.vol_aux,
            self.num_docs,
            free_kws,
            free_toks,
            fixed_kws,
            fixed_toks,
            self.flip_absence_term,
        )


class IidFreqCoefficients:
    """Poisson count costs for independently drawn queries; no pair terms."""

    def __init__(self, freq_obs, freq_aux, query_count):
        self.freq_obs = np.asarray(freq_obs, dtype=np.float64)
        self.freq_aux = np.asarray(freq_aux, dtype=np.float64)
        self.query_count = int(query_count)
        self._full_linear = iid_freq_linear_costs(
            self.freq_obs, self.freq_aux, self.query_count
        )

    @property
    def num_keywords(self):
        return self.freq_aux.shape[0]

    @property
    def num_tokens(self):
        return self.freq_obs.shape[0]

    def linear_costs(self, free_kws, free_toks):
        return self._full_linear[np.ix_(_as_index(free_kws), _as_index(free_toks))]

    def fixed_pair_costs(self, free_kws, free_toks, fixed_kws, fixed_toks):
        return np.zeros((len(free_kws), len(free_toks)))


class MarkovCoefficients:
    """Poisson transition costs for chained queries.

    aux_weights defaults to the stationary distribution of the auxiliary
    chain; it weights partners inside the auxiliary free-successor aggregate
    the way observed query counts weight the observed one.
    """

    def __init__(
        self,
        trans_obs,
        trans_aux,
        token_counts,
        aux_weights=None,
        scalar_free_count=False,
    ):
        self.trans_obs = np.asarray(trans_obs, dtype=np.float64)
        self.trans_aux = np.asarray(trans_aux, dtype=np.float64)
        self.token_counts = np.asarray(token_counts, dtype=np.float64)
        if aux_weights is None:
            aux_weights = stationary_distribution(self.trans_aux)
        self.aux_weights = np.asarray(aux_weights, dtype=np.float64)
        self.scalar_free_count = bool(scalar_free_count)

    @property
    def num_keywords(self):
        return self.trans_aux.shape[0]

    @property
    def num_tokens(self):
        return self.trans_obs.shape[0]

    def linear_costs(self, free_kws, free_toks):
        return markov_linear_costs(
            self.trans_obs,
            self.trans_aux,
            self.token_counts,
            self.aux_weights,
            free_kws,
            free_toks,
            self.scalar_free_count,
        )

    def fixed_pair_costs(self, free_kws, free_toks, fixed_kws, fixed_toks):
        return markov_pair_costs(
            self.trans_obs,
            self.trans_aux,
            self.token_counts,
            free_kws,
            free_toks,
            fixed_kws,
            fixed_toks,
        )


class SumCoefficients:
    """Additive combination of coefficient families, optionally weighted.

    Observations of independent leakage channels multiply as likelihoods, so
    their costs add.
    """

    def __init__(self, providers, weights=None):
        providers = list(providers)
        if not providers:
            raise ValueError("need at least one provider")
        if weights is None:
            weights = [1.0] * len(providers)
        if len(weights) != len(providers):
            raise ValueError("one weight per provider")
        shapes = {(p.num_keywords, p.num_tokens) for p in providers}
        if len(shapes) != 1:
            raise ValueError("providers disagree on problem size")
        self.providers = providers
        self.weights = [float(w) for w in weights]

    @property
    def num_keywords(self):
        return self.providers[0].num_keywords

    @property
    def num_tokens(self):
        return self.providers[0].num_tokens

    def linear_costs(self, free_kws, free_toks):
        total = None
        for w, p in zip(self.weights, self.providers):
            part = w * p.linear_costs(free_kws, free_toks)
            total = part if total is None else total + part
        return total

    def fixed_pair_costs(self, free_kws, free_toks, fixed_kws, fixed_toks):
        total = None
        for w, p in zip(self.weights, self.providers):
            part = w * p.fixed_pair_costs(free_kws, free_toks, fixed_kws, fixed_toks)
            total = part if total is None else total + part
        return total
