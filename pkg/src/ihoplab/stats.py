"""Observation statistics and auxiliary estimates.

Observed side (token-indexed, size m):
    volume[j, j']   fraction of client documents matching both tokens
    freq[j]         fraction of queries carrying token j
    trans[j, j']    fraction of queries with token j' whose successor is j
    token_counts[j] number of queries carrying token j

Auxiliary side (keyword-indexed, size n): the same quantities estimated from
auxiliary documents or query data, smoothed so that every entry that later
meets a logarithm is strictly inside (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._gram import gram_counts
from .markov import check_transition_matrix

FREQ_SMOOTHING = 1e-6


def compute_observed_volume(patterns: np.ndarray, num_docs: int) -> np.ndarray:
    """Normalized co-occurrence of access patterns: inner products over the
    document axis divided by the collection size."""
    patterns = np.asarray(patterns, dtype=bool)
    if patterns.ndim != 2 or patterns.shape[0] == 0:
        raise ValueError("need at least one access pattern")
    if num_docs <= 0:
        raise ValueError("num_docs must be positive")
    if patterns.shape[1] != num_docs:
        raise ValueError("pattern length does not match num_docs")
    return gram_counts(patterns) / float(num_docs)


def compute_observed_freq(tokens: np.ndarray, num_tokens: int):
    """Per-token query frequencies and the successor transition estimate.

    Returns (freq, trans, token_counts).  trans[:, j] is the empirical
    distribution of the token following j.  The final query has no successor,
    so its token's column is normalized by the count of queries that do have
    one; a column with no outgoing transitions at all stays zero.
    """
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.ndim != 1 or tokens.size == 0:
        raise ValueError("token sequence must be 1-d and nonempty")
    if num_tokens <= 0 or tokens.min() < 0 or tokens.max() >= num_tokens:
        raise ValueError("token id out of range")
    counts = np.bincount(tokens, minlength=num_tokens).astype(np.float64)
    freq = counts / tokens.size
    pair_counts = np.zeros((num_tokens, num_tokens), dtype=np.float64)
    if tokens.size > 1:
        np.add.at(pair_counts, (tokens[1:], tokens[:-1]), 1.0)
    outgoing = counts.copy()
    outgoing[tokens[-1]] -= 1.0
    trans = np.zeros_like(pair_counts)
    nonzero = outgoing > 0
    trans[:, nonzero] = pair_counts[:, nonzero] / outgoing[nonzero]
    return freq, trans, counts


@dataclass
class LeakageStats:
    """Token-side statistics handed to attacks, plus the sizes they scale by."""

    num_docs: int
    query_count: int
    volume: np.ndarray | None = None  # (m, m)
    freq: np.ndarray | None = None  # (m,)
    trans: np.ndarray | None = None  # (m, m)
    token_counts: np.ndarray | None = None  # (m,)

    @property
    def num_tokens(self) -> int:
        for part in (self.volume, self.freq, self.token_counts):
            if part is not None:
                return int(np.asarray(part).shape[0])
        raise ValueError("leakage carries no statistics")

    def validate(self) -> None:
        m = self.num_tokens
        if self.volume is not None:
            vol = np.asarray(self.volume)
            if vol.shape != (m, m):
                raise ValueError("volume must be square over the tokens")
            if not np.allclose(vol, vol.T):
                raise ValueError("volume must be symmetric")
            diag = np.diag(vol)
            if np.any(vol < -1e-12) or np.any(diag > 1.0 + 1e-12):
                raise ValueError("volume entries out of range")
            if np.any(vol > diag[None, :] + 1e-9):
                raise ValueError("pair volume exceeds a single-token volume")
        if self.freq is not None:
            f = np.asarray(self.freq)
            if f.shape != (m,) or np.any(f < 0):
                raise ValueError("freq must be a nonnegative length-m vector")
            if self.query_count > 0 and abs(f.sum() - 1.0) > 1e-9:
                raise ValueError("freq must sum to 1")
        if self.trans is not None:
            t = np.asarray(self.trans)
            if t.shape != (m, m) or np.any(t < 0):
                raise ValueError("trans must be a nonnegative square matrix")
            colsums = t.sum(axis=0)
            bad = (np.abs(colsums - 1.0) > 1e-9) & (colsums > 1e-12)
            if np.any(bad):
                raise ValueError("trans columns must sum to 1 (or be all zero)")


def smooth_aux_volume(pair_counts: np.ndarray, num_docs: int):
    """Additively smoothed co-occurrence and co-absence probabilities.

    Both matrices land strictly inside (0, 1) and their sum never exceeds 1,
    which keeps log(v), log(1 - v) and the defended-volume predictions finite.
    """
    pair_counts = np.asarray(pair_counts, dtype=np.float64)
    singles = np.diag(pair_counts)
    neither = num_docs - singles[:, None] - singles[None, :] + pair_counts
    np.fill_diagonal(neither, num_docs - singles)
    vol = (pair_counts + 0.5) / (num_docs + 1.0)
    vol_not = (neither + 0.5) / (num_docs + 1.0)
    return vol, vol_not


def smooth_freq(freq: np.ndarray, eps: float = FREQ_SMOOTHING) -> np.ndarray:
    """Mix in eps of uniform mass per entry and renormalize, so that zero
    observations keep a strictly positive estimate."""
    freq = np.asarray(freq, dtype=np.float64)
    if np.any(freq < 0):
        raise ValueError("frequencies must be nonnegative")
    out = freq + eps
    return out / out.sum()


def smooth_trans(trans: np.ndarray, eps: float = FREQ_SMOOTHING) -> np.ndarray:
    """Column-wise version of smooth_freq for transition matrices."""
    trans = np.asarray(trans, dtype=np.float64)
    if trans.ndim != 2 or trans.shape[0] != trans.shape[1]:
        raise ValueError("transition matrix must be square")
    if np.any(trans < 0):
        raise ValueError("transition entries must be nonnegative")
    out = trans + eps
    return out / out.sum(axis=0, keepdims=True)


@dataclass
class AuxStats:
    """Keyword-side estimates the adversary attacks with."""

    num_docs: int = 0
    volume: np.ndarray | None = None  # (n, n), strictly in (0, 1)
    volume_not: np.ndarray | None = None  # (n, n), strictly in (0, 1)
    freq: np.ndarray | None = None  # (n,), strictly positive
    trans: np.ndarray | None = None  # (n, n), strictly positive columns

    @property
    def num_keywords(self) -> int:
        for part in (self.volume, self.freq, self.trans):
            if part is not None:
                return int(np.asarray(part).shape[0])
        raise ValueError("auxiliary stats are empty")

    def validate(self) -> None:
        n = self.num_keywords
        if self.volume is not None:
            v = np.asarray(self.volume)
            if v.shape != (n, n):
                raise ValueError("volume must be square over the keywords")
            if np.any(v <= 0) or np.any(v >= 1):
                raise ValueError("volume must lie strictly inside (0, 1)")
        if self.volume_not is not None:
            vn = np.asarray(self.volume_not)
            if vn.shape != (n, n) or np.any(vn <= 0) or np.any(vn >= 1):
                raise ValueError("volume_not must lie strictly inside (0, 1)")
            if self.volume is not None and np.any(
                np.asarray(self.volume) + vn > 1 + 1e-12
            ):
                raise ValueError("volume + volume_not must stay below 1")
        if self.freq is not None:
            f = np.asarray(self.freq)
            if f.shape != (n,) or np.any(f <= 0):
                raise ValueError("freq must be strictly positive")
            if abs(f.sum() - 1.0) > 1e-9:
                raise ValueError("freq must sum to 1")
        if self.trans is not None:
            t = np.asarray(self.trans)
            if t.shape[0] != t.shape[1]:
                raise ValueError("trans must be square")
            if np.any(t <= 0):
                raise ValueError("trans must be strictly positive after smoothing")
            check_transition_matrix(t)


def aux_from_documents(docs) -> AuxStats:
    """Volume estimates from an auxiliary document collection."""
    if docs.num_docs == 0:
        raise ValueError("auxiliary collection is empty")
    counts = gram_counts(docs.bool_matrix())
    vol, vol_not = smooth_aux_volume(counts, docs.num_docs)
    return AuxStats(num_docs=docs.num_docs, volume=vol, volume_not=vol_not)
