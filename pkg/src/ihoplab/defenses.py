"""Access-pattern obfuscation defenses and the adversary's adjustments.

Both defenses flip incidence cells independently: a true match survives with
probability tpr, a non-match is injected with probability fpr.  The static
variant does it once at setup time, the per-query variant does it freshly on
every query, which also hides which queries repeat a token.

Attacks are not defense-aware; they just consume the observed volumes and a
predicted auxiliary volume, so countering a defense means substituting
expected_obfuscated_volume for the plain auxiliary estimate (and, for the
per-query variant, clustering the query patterns back into pseudo-tokens).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from ._gram import gram_counts
from .model import DocumentCollection

_DOC_CHUNK = 4096


@dataclass(frozen=True)
class ObfuscationParams:
    tpr: float = 0.999
    fpr: float = 0.01

    def validate(self) -> None:
        if not (0.0 <= self.fpr < self.tpr <= 1.0):
            raise ValueError("need 0 <= fpr < tpr <= 1")


def clrz_apply(
    docs: DocumentCollection, params: ObfuscationParams, rng
) -> DocumentCollection:
    """One-shot obfuscation of the whole index: every (document, keyword)
    cell keeps a true keyword with probability tpr and gains a false one with
    probability fpr, independently."""
    params.validate()
    rng = np.random.default_rng(rng)
    mat = docs.bool_matrix()
    out_docs = []
    n = docs.num_keywords
    for start in range(0, docs.num_docs, _DOC_CHUNK):
        stop = min(start + _DOC_CHUNK, docs.num_docs)
        block = mat[:, start:stop].T.copy()
        draws = rng.random(block.shape)
        keep = draws < params.tpr
        add = draws < params.fpr
        block = np.where(block, keep, add)
        for row in block:
            out_docs.append(np.flatnonzero(row).astype(np.int32))
    return DocumentCollection(n, out_docs)


def expected_obfuscated_volume(
    vol_aux: np.ndarray, vol_aux_not: np.ndarray, params: ObfuscationParams
) -> np.ndarray:
    """Predicted co-occurrence probabilities after cell obfuscation.

    A pair of keywords co-matches a document if both survived (true co-match),
    both were injected (co-absence), or one of each (mixed); a single keyword
    matches if it survived or was injected.
    """
    params.validate()
    v = np.asarray(vol_aux, dtype=np.float64)
    vn = np.asarray(vol_aux_not, dtype=np.float64)
    tpr, fpr = params.tpr, params.fpr
    out = (
        tpr * tpr * v
        + fpr * fpr * vn
        + tpr * fpr * (1.0 - v - vn)
    )
    np.fill_diagonal(out, tpr * np.diag(v) + fpr * np.diag(vn))
    return out


def osse_query(
    docs: DocumentCollection, keyword: int, params: ObfuscationParams, rng
) -> np.ndarray:
    """A fresh obfuscated access pattern for one query."""
    params.validate()
    if not (0 <= keyword < docs.num_keywords):
        raise ValueError("keyword out of range")
    rng = np.random.default_rng(rng)
    true_row = docs.bool_matrix()[keyword]
    draws = rng.random(docs.num_docs)
    return np.where(true_row, draws < params.tpr, draws < params.fpr)


def osse_pattern_fn(docs: DocumentCollection, params: ObfuscationParams):
    """Per-query pattern hook for the S2 simulator."""
    return lambda keyword, rng: osse_query(docs, keyword, params, rng)


def osse_cluster(query_patterns: np.ndarray, num_clusters: int):
    """Group per-query obfuscated patterns into pseudo-tokens.

    Average-linkage agglomeration under Jaccard distance, cut at the known
    number of distinct queried keywords.  Returns (labels, clusters): labels
    give each query its pseudo-token in [0, num_clusters), numbered by first
    appearance; clusters[t] holds the pattern rows of pseudo-token t.
    """
    patterns = np.asarray(query_patterns, dtype=bool)
    if patterns.ndim != 2 or patterns.shape[0] == 0:
        raise ValueError("need at least one query pattern")
    if not (1 <= num_clusters <= patterns.shape[0]):
        raise ValueError("cluster count out of range")
    if num_clusters == patterns.shape[0]:
        raw = np.arange(patterns.shape[0]) + 1
    else:
        dist = pdist(patterns, metric="jaccard")
        tree = linkage(dist, method="average")
        raw = fcluster(tree, t=num_clusters, criterion="maxclust")
    # renumber by first appearance so labels are deterministic
    remap = {}
    labels = np.empty(patterns.shape[0], dtype=np.int64)
    for q, c in enumerate(raw):
        c = int(c)
        if c not in remap:
            remap[c] = len(remap)
        labels[q] = remap[c]
    if len(remap) != num_clusters:
        raise ValueError(
            f"clustering produced {len(remap)} groups, wanted {num_clusters}"
        )
    clusters = [patterns[labels == t] for t in range(num_clusters)]
    return labels, clusters


def osse_observed_volume(clusters, num_docs: int) -> np.ndarray:
    """Cluster-averaged volume estimates.

    The diagonal averages each member's own match fraction; off-diagonal
    entries average the normalized inner products across the two clusters.
    """
    if num_docs <= 0:
        raise ValueError("num_docs must be positive")
    clusters = [np.asarray(c, dtype=bool) for c in clusters]
    if not clusters or any(c.shape[0] == 0 for c in clusters):
        raise ValueError("every cluster needs at least one pattern")
    stacked = np.concatenate(clusters, axis=0)
    counts = gram_counts(stacked) / float(num_docs)
    sizes = [c.shape[0] for c in clusters]
    bounds = np.cumsum([0] + sizes)
    m = len(clusters)
    out = np.empty((m, m), dtype=np.float64)
    for a in range(m):
        for b in range(m):
            block = counts[bounds[a] : bounds[a + 1], bounds[b] : bounds[b + 1]]
            if a == b:
                out[a, a] = float(np.mean(np.diag(block)))
            else:
                out[a, b] = float(np.mean(block))
    return out
