"""Observed statistics, smoothing, and the auxiliary estimators."""

import numpy as np
import pytest

from ihoplab.model import DocumentCollection
from ihoplab.stats import (
    AuxStats,
    LeakageStats,
    aux_from_documents,
    compute_observed_freq,
    compute_observed_volume,
    smooth_aux_volume,
    smooth_freq,
    smooth_trans,
)


def test_observed_volume_worked_examples():
    full = np.ones((2, 4), dtype=bool)
    assert np.allclose(compute_observed_volume(full, 4), 1.0)

    pats = np.array([
        [1, 1, 0, 0],
        [0, 1, 1, 0],
    ], dtype=bool)
    v = compute_observed_volume(pats, 4)
    assert np.allclose(v, [[0.5, 0.25], [0.25, 0.5]])

    disjoint = np.array([[1, 0], [0, 1]], dtype=bool)
    v = compute_observed_volume(disjoint, 2)
    assert v[0, 1] == 0.0


def test_observed_volume_rejects_bad_shapes():
    with pytest.raises(ValueError):
        compute_observed_volume(np.zeros((0, 3), dtype=bool), 3)
    with pytest.raises(ValueError):
        compute_observed_volume(np.zeros((2, 3), dtype=bool), 4)
    with pytest.raises(ValueError):
        compute_observed_volume(np.zeros((2, 3), dtype=bool), 0)


def test_observed_freq_examples():
    freq, trans, counts = compute_observed_freq(np.array([0, 0, 0]), 1)
    assert freq.tolist() == [1.0]
    assert trans.tolist() == [[1.0]]

    freq, trans, counts = compute_observed_freq(np.array([0, 1, 0, 1]), 2)
    assert freq.tolist() == [0.5, 0.5]
    # the final query has no successor, yet its column still normalizes
    assert np.array_equal(trans, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert counts.tolist() == [2.0, 2.0]


def test_observed_freq_columns_stochastic_or_zero():
    rng = np.random.default_rng(51)
    seq = rng.integers(0, 5, size=400)
    freq, trans, counts = compute_observed_freq(seq, 6)
    colsums = trans.sum(axis=0)
    seen = colsums > 0
    assert np.allclose(colsums[seen], 1.0)
    assert colsums[5] == 0.0  # token 5 never appears
    assert freq.sum() == pytest.approx(1.0)


def test_observed_freq_long_iid_converges():
    rng = np.random.default_rng(52)
    p = np.array([0.5, 0.3, 0.2])
    seq = rng.choice(3, size=20000, p=p)
    freq, trans, _ = compute_observed_freq(seq, 3)
    assert np.abs(freq - p).max() < 0.05
    # an iid stream's successor columns all approximate the marginals
    assert np.abs(trans - p[:, None]).max() < 0.05


def test_smooth_aux_volume_worked_value():
    # 2 of 2 docs match both keywords: (2 + 0.5) / (2 + 1)
    counts = np.array([[2.0, 2.0], [2.0, 2.0]])
    vol, vol_not = smooth_aux_volume(counts, 2)
    assert vol[0, 1] == pytest.approx(2.5 / 3)
    # nobody avoids both keywords: 0.5 / 3
    assert vol_not[0, 1] == pytest.approx(0.5 / 3)
    assert np.all(vol > 0) and np.all(vol < 1)
    assert np.all(vol + vol_not <= 1 + 1e-12)


def test_smooth_aux_volume_not_diagonal_complements():
    counts = np.array([[3.0, 1.0], [1.0, 2.0]])
    vol, vol_not = smooth_aux_volume(counts, 10)
    # diagonal of the miss matrix counts documents missing that keyword
    assert vol_not[0, 0] == pytest.approx((10 - 3 + 0.5) / 11)
    assert vol_not[1, 1] == pytest.approx((10 - 2 + 0.5) / 11)


def test_smooth_freq_strictly_positive_and_normalized():
    f = smooth_freq(np.array([0.0, 0.0, 1.0]))
    assert np.all(f > 0)
    assert f.sum() == pytest.approx(1.0)
    assert f[2] > f[0]


def test_smooth_trans_columns_normalized():
    t = smooth_trans(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.all(t > 0)
    assert np.allclose(t.sum(axis=0), 1.0)


def test_leakage_validation():
    good = LeakageStats(num_docs=4, query_count=0,
                        volume=np.array([[0.5, 0.25], [0.25, 0.5]]))
    good.validate()
    with pytest.raises(ValueError):
        LeakageStats(num_docs=4, query_count=0,
                     volume=np.array([[0.5, 0.3], [0.2, 0.5]])).validate()
    with pytest.raises(ValueError):
        LeakageStats(num_docs=4, query_count=0,
                     volume=np.array([[0.2, 0.4], [0.4, 0.5]])).validate()
    with pytest.raises(ValueError):
        LeakageStats(num_docs=4, query_count=10,
                     freq=np.array([0.5, 0.4])).validate()
    with pytest.raises(ValueError):
        LeakageStats(num_docs=4, query_count=0).num_tokens


def test_aux_validation():
    ok = AuxStats(volume=np.array([[0.5, 0.2], [0.2, 0.5]]),
                  volume_not=np.array([[0.4, 0.3], [0.3, 0.4]]))
    ok.validate()
    with pytest.raises(ValueError):
        AuxStats(volume=np.array([[1.0, 0.2], [0.2, 0.5]])).validate()
    with pytest.raises(ValueError):
        AuxStats(volume=np.array([[0.9, 0.2], [0.2, 0.5]]),
                 volume_not=np.array([[0.4, 0.3], [0.3, 0.4]])).validate()
    with pytest.raises(ValueError):
        AuxStats(freq=np.array([0.5, 0.6])).validate()
    with pytest.raises(ValueError):
        AuxStats(trans=np.array([[0.5, 0.0], [0.5, 1.0]])).validate()


def test_aux_from_documents_smoothed_and_valid():
    docs = DocumentCollection(2, [[0, 1], [0], [1]])
    aux = aux_from_documents(docs)
    aux.validate()
    assert aux.volume[0, 0] == pytest.approx(2.5 / 4)
    assert aux.volume[0, 1] == pytest.approx(1.5 / 4)
    assert aux.volume_not[0, 1] == pytest.approx(0.5 / 4)


def test_aux_from_documents_rejects_empty():
    with pytest.raises(ValueError):
        aux_from_documents(DocumentCollection(2, []))


def test_aux_error_shrinks_with_collection_size():
    """Sampling documents from a fixed law, the smoothed co-occurrence
    estimate should approach the law as the auxiliary collection grows."""
    rng = np.random.default_rng(53)
    n = 6
    probs = rng.uniform(0.2, 0.7, size=n)
    errors = []
    for size in (100, 1000, 10000):
        mat = rng.random((size, n)) < probs[None, :]
        docs = DocumentCollection(n, [np.flatnonzero(r) for r in mat])
        aux = aux_from_documents(docs)
        true_v = np.outer(probs, probs)
        np.fill_diagonal(true_v, probs)
        errors.append(np.abs(aux.volume - true_v).max())
    assert errors[2] < errors[0]
    assert errors[2] < 0.02
