"""Leakage simulators for the three observation scenarios.

Token identifiers are what the adversary sees; the simulators relabel the
client's keywords with seeded random permutations and keep the true map
aside for scoring only.
"""

from __future__ import annotations

import numpy as np

from .model import DocumentCollection, ObservationTrace, SimulatedObservation


def simulate_s1(docs: DocumentCollection, rng) -> SimulatedObservation:
    """Every keyword is queried exactly once: the adversary sees one access
    pattern per token and nothing about frequencies."""
    if docs.num_docs == 0:
        raise ValueError("empty document collection")
    rng = np.random.default_rng(rng)
    n = docs.num_keywords
    truth = rng.permutation(n)
    patterns = docs.bool_matrix()[truth]
    trace = ObservationTrace(
        scenario="S1", num_docs=docs.num_docs, token_patterns=patterns
    )
    return SimulatedObservation(trace=trace, truth=truth)


def _relabel_first_appearance(query_seq: np.ndarray, rng):
    """Dense token ids in order of first appearance, then a seeded relabeling.

    Returns (tokens, truth): tokens is the relabeled sequence, truth[t] the
    keyword behind token t.
    """
    query_seq = np.asarray(query_seq, dtype=np.int64)
    if query_seq.ndim != 1 or query_seq.size == 0:
        raise ValueError("query sequence must be 1-d and nonempty")
    first_ids = {}
    provisional = np.empty(query_seq.size, dtype=np.int64)
    order = []
    for r, kw in enumerate(query_seq):
        kw = int(kw)
        if kw not in first_ids:
            first_ids[kw] = len(order)
            order.append(kw)
        provisional[r] = first_ids[kw]
    m = len(order)
    relabel = rng.permutation(m)
    tokens = relabel[provisional]
    truth = np.empty(m, dtype=np.int64)
    truth[relabel] = np.asarray(order, dtype=np.int64)
    return tokens, truth


def simulate_s2(
    docs: DocumentCollection, query_seq, rng, pattern_fn=None
) -> SimulatedObservation:
    """Query sequence with observable repetitions: distinct queried keywords
    become tokens, and each query leaks its access pattern.

    pattern_fn(keyword, rng) may supply a fresh pattern per query (used by
    per-query obfuscation); by default each keyword's true pattern repeats.
    """
    if docs.num_docs == 0:
        raise ValueError("empty document collection")
    rng = np.random.default_rng(rng)
    query_seq = np.asarray(query_seq, dtype=np.int64)
    if query_seq.size and (
        query_seq.min() < 0 or query_seq.max() >= docs.num_keywords
    ):
        raise ValueError("queried keyword out of range")
    tokens, truth = _relabel_first_appearance(query_seq, rng)
    m = truth.size
    if pattern_fn is None:
        token_patterns = docs.bool_matrix()[truth]
        trace = ObservationTrace(
            scenario="S2",
            num_docs=docs.num_docs,
            token_patterns=token_patterns,
            query_tokens=tokens,
        )
    else:
        query_patterns = np.stack(
            [pattern_fn(int(kw), rng) for kw in query_seq]
        ).astype(bool)
        trace = ObservationTrace(
            scenario="S2",
            num_docs=docs.num_docs,
            query_tokens=tokens,
            query_patterns=query_patterns,
            num_tokens=m,
        )
    return SimulatedObservation(trace=trace, truth=truth)


def simulate_s3(query_seq, rng) -> SimulatedObservation:
    """Token sequence only: no document contents, frequency information is the
    whole observation."""
    rng = np.random.default_rng(rng)
    tokens, truth = _relabel_first_appearance(query_seq, rng)
    trace = ObservationTrace(
        scenario="S3", num_docs=0, query_tokens=tokens, num_tokens=truth.size
    )
    return SimulatedObservation(trace=trace, truth=truth)
