"""Scenario simulators: token relabeling, leaked patterns, ground truth."""

import numpy as np
import pytest

from ihoplab.model import DocumentCollection
from ihoplab.sim import simulate_s1, simulate_s2, simulate_s3
from ihoplab.stats import compute_observed_volume


def _docs(seed, n=6, count=120):
    rng = np.random.default_rng(seed)
    return DocumentCollection(
        n, [rng.choice(n, size=rng.integers(1, n), replace=False)
            for _ in range(count)]
    )


def test_s1_patterns_follow_truth():
    docs = _docs(71)
    obs = simulate_s1(docs, np.random.default_rng(0))
    assert sorted(obs.truth.tolist()) == list(range(6))
    mat = docs.bool_matrix()
    for tok in range(6):
        assert np.array_equal(obs.trace.token_patterns[tok], mat[obs.truth[tok]])


def test_s1_deterministic_given_rng():
    docs = _docs(72)
    a = simulate_s1(docs, np.random.default_rng(5))
    b = simulate_s1(docs, np.random.default_rng(5))
    assert np.array_equal(a.truth, b.truth)


def test_s1_volume_is_permuted_truth():
    docs = _docs(73)
    obs = simulate_s1(docs, np.random.default_rng(1))
    v_true = compute_observed_volume(docs.bool_matrix(), docs.num_docs)
    v_obs = compute_observed_volume(obs.trace.token_patterns, docs.num_docs)
    assert np.allclose(v_obs, v_true[np.ix_(obs.truth, obs.truth)])


def test_s1_rejects_empty_collection():
    with pytest.raises(ValueError):
        simulate_s1(DocumentCollection(3, []), np.random.default_rng(0))


def test_s2_tokens_consistent_with_truth():
    docs = _docs(74)
    seq = np.array([2, 5, 2, 0, 5, 5, 1])
    obs = simulate_s2(docs, seq, np.random.default_rng(2))
    # four distinct keywords queried -> four tokens
    assert obs.truth.size == 4
    assert np.array_equal(obs.truth[obs.trace.query_tokens], seq)
    # repeated keyword keeps its token
    toks = obs.trace.query_tokens
    assert toks[0] == toks[2]
    assert toks[1] == toks[4] == toks[5]
    assert obs.trace.token_patterns.shape == (4, docs.num_docs)


def test_s2_patterns_match_queried_keywords():
    docs = _docs(75)
    seq = np.array([1, 3, 4, 1])
    obs = simulate_s2(docs, seq, np.random.default_rng(3))
    mat = docs.bool_matrix()
    for tok in range(obs.truth.size):
        assert np.array_equal(obs.trace.token_patterns[tok], mat[obs.truth[tok]])


def test_s2_per_query_pattern_fn():
    docs = _docs(76)
    seq = np.array([0, 1, 0])
    calls = []

    def fn(kw, rng):
        calls.append(kw)
        pat = np.zeros(docs.num_docs, dtype=bool)
        pat[kw] = True
        return pat

    obs = simulate_s2(docs, seq, np.random.default_rng(4), pattern_fn=fn)
    assert calls == [0, 1, 0]
    assert obs.trace.token_patterns is None
    assert obs.trace.query_patterns.shape == (3, docs.num_docs)
    assert obs.trace.num_tokens == 2


def test_s2_rejects_out_of_range_keyword():
    docs = _docs(77)
    with pytest.raises(ValueError):
        simulate_s2(docs, np.array([0, 99]), np.random.default_rng(0))


def test_s3_sequence_only():
    seq = np.array([3, 1, 3, 2, 2])
    obs = simulate_s3(seq, np.random.default_rng(6))
    assert obs.trace.token_patterns is None
    assert obs.trace.scenario == "S3"
    assert np.array_equal(obs.truth[obs.trace.query_tokens], seq)
    assert obs.trace.query_count == 5


def test_s3_relabeling_varies_with_rng():
    seq = np.arange(30)
    a = simulate_s3(seq, np.random.default_rng(7))
    b = simulate_s3(seq, np.random.default_rng(8))
    assert not np.array_equal(a.trace.query_tokens, b.trace.query_tokens)
    # but both stay consistent with their own truth
    assert np.array_equal(a.truth[a.trace.query_tokens], seq)
    assert np.array_equal(b.truth[b.trace.query_tokens], seq)


def test_s3_rejects_empty_sequence():
    with pytest.raises(ValueError):
        simulate_s3(np.array([], dtype=np.int64), np.random.default_rng(0))
