"""Coefficient families: worked values, structural identities, aggregates."""

import numpy as np
import pytest

from ihoplab.coeffs import (
    IidFreqCoefficients,
    MarkovCoefficients,
    SumCoefficients,
    VolumeCoefficients,
    aux_free_aggregate,
    iid_freq_linear_costs,
    markov_free_aggregate,
    markov_linear_costs,
    markov_pair_costs,
    volume_linear_costs,
    volume_pair_costs,
)
from ihoplab.lap import solve_lap_min


def test_volume_linear_worked_value():
    # one candidate pair: N_d = 10, observed diag 0.3, auxiliary diag 0.2
    d = volume_linear_costs(np.array([[0.3]]), np.array([[0.2]]), 10)
    expected = -10.0 * (0.3 * np.log(0.2) + 0.7 * np.log(0.8))
    assert d[0, 0] == pytest.approx(expected, rel=1e-12)
    assert d[0, 0] == pytest.approx(6.390318596501769, rel=1e-12)


def test_volume_linear_all_miss():
    d = volume_linear_costs(np.array([[0.0]]), np.array([[0.2]]), 7)
    assert d[0, 0] == pytest.approx(-7.0 * np.log(0.8), rel=1e-12)


def test_volume_linear_half_is_constant_row():
    # auxiliary 0.5 scores every observation identically: N_d * log 2
    obs = np.diag([0.1, 0.6, 0.4])
    aux = np.full((3, 3), 0.5)
    d = volume_linear_costs(obs, aux, 20)
    assert np.allclose(d, 20.0 * np.log(2.0))


def test_volume_linear_flipped_absence_sign():
    obs = np.array([[0.3]])
    aux = np.array([[0.2]])
    flipped = volume_linear_costs(obs, aux, 10, flip_absence_term=True)
    expected = -10.0 * (0.3 * np.log(0.2) - 0.7 * np.log(0.8))
    assert flipped[0, 0] == pytest.approx(expected, rel=1e-12)
    assert flipped[0, 0] == pytest.approx(3.2663088781028327, rel=1e-12)


def test_volume_pair_single_fixed_matches_scalar():
    rng = np.random.default_rng(8)
    n = 5
    aux = rng.uniform(0.1, 0.9, size=(n, n))
    aux = (aux + aux.T) / 2
    obs = rng.uniform(0.0, 1.0, size=(n, n))
    obs = (obs + obs.T) / 2
    free_kws = np.array([0, 1, 2])
    free_toks = np.array([0, 1, 2])
    fixed_kws = np.array([4])
    fixed_toks = np.array([3])
    got = volume_pair_costs(obs, aux, 50, free_kws, free_toks,
                            fixed_kws, fixed_toks)
    for r, i in enumerate(free_kws):
        for a, j in enumerate(free_toks):
            v = obs[j, fixed_toks[0]]
            vt = aux[i, fixed_kws[0]]
            scalar = -50.0 * (v * np.log(vt) + (1 - v) * np.log(1 - vt))
            assert got[r, a] == pytest.approx(scalar, rel=1e-12)


def test_volume_pair_half_aux_keeps_linear_argmin():
    """With every off-diagonal auxiliary volume at 0.5 the pair costs add the
    same constant to each free token's column, so the assignment under
    linear + pair costs equals the linear-only assignment."""
    rng = np.random.default_rng(9)
    n = 6
    diag_aux = rng.uniform(0.2, 0.8, size=n)
    aux = np.full((n, n), 0.5)
    np.fill_diagonal(aux, diag_aux)
    obs = rng.uniform(0.0, 0.5, size=(n, n))
    obs = (obs + obs.T) / 2
    prov = VolumeCoefficients(obs, aux, 100)
    free_kws = np.array([0, 1, 2, 3])
    free_toks = np.array([0, 1, 2, 3])
    fixed_kws = np.array([4, 5])
    fixed_toks = np.array([4, 5])
    linear = prov.linear_costs(free_kws, free_toks)
    pair = prov.fixed_pair_costs(free_kws, free_toks, fixed_kws, fixed_toks)
    assert solve_lap_min(linear + pair).tolist() == solve_lap_min(linear).tolist()


def test_iid_freq_worked_value():
    d = iid_freq_linear_costs(np.array([0.1]), np.array([0.05]), 100)
    assert d[0, 0] == pytest.approx(-100 * 0.1 * np.log(0.05), rel=1e-12)
    assert d[0, 0] == pytest.approx(29.957322735539908, rel=1e-12)


def test_iid_freq_zero_observation_row():
    d = iid_freq_linear_costs(np.array([0.2, 0.0]), np.array([0.3, 0.7]), 50)
    assert np.all(d[:, 1] == 0.0)


def test_iid_freq_scaling_preserves_argmin():
    rng = np.random.default_rng(10)
    f = rng.dirichlet(np.ones(5))
    ft = rng.dirichlet(np.ones(5))
    d1 = iid_freq_linear_costs(f, ft, 100)
    d2 = iid_freq_linear_costs(f, ft, 200)
    assert np.allclose(d2, 2.0 * d1)
    assert solve_lap_min(d1).tolist() == solve_lap_min(d2).tolist()


def test_markov_free_aggregate_shares():
    trans = np.array([
        [0.0, 0.5, 0.2],
        [0.6, 0.0, 0.8],
        [0.4, 0.5, 0.0],
    ])
    counts = np.array([10.0, 20.0, 30.0])
    agg_prob, agg_count = markov_free_aggregate(trans, counts, [0, 1, 2])
    # incoming free mass per token, hand-tallied
    numer = np.array([
        0.5 * 20 + 0.2 * 30,   # into 0
        0.6 * 10 + 0.8 * 30,   # into 1
        0.4 * 10 + 0.5 * 20,   # into 2
    ])
    assert np.allclose(agg_prob, numer / numer.sum())
    assert agg_prob.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(agg_count, [50.0, 40.0, 30.0])


def test_markov_free_aggregate_scalar_count():
    trans = np.full((3, 3), 1 / 3)
    counts = np.array([5.0, 7.0, 9.0])
    _, agg_count = markov_free_aggregate(trans, counts, [0, 1, 2],
                                         scalar_free_count=True)
    assert np.allclose(agg_count, 21.0)


def test_markov_free_aggregate_lone_token():
    trans = np.eye(3)
    agg_prob, agg_count = markov_free_aggregate(trans, np.ones(3), [1])
    assert np.all(agg_prob == 0.0)
    assert np.all(agg_count == 0.0)


def test_aux_free_aggregate_matches_weighted_tally():
    rng = np.random.default_rng(11)
    n = 4
    trans = rng.dirichlet(np.ones(n), size=n).T
    w = rng.dirichlet(np.ones(n))
    agg = aux_free_aggregate(trans, w, np.arange(n))
    numer = np.array([
        sum(trans[i, k] * w[k] for k in range(n) if k != i) for i in range(n)
    ])
    assert np.allclose(agg, numer / numer.sum())


def test_markov_linear_hand_instance():
    trans_obs = np.array([[0.7, 0.4], [0.3, 0.6]])
    trans_aux = np.array([[0.8, 0.5], [0.2, 0.5]])
    counts = np.array([10.0, 10.0])
    weights = np.array([0.5, 0.5])
    d = markov_linear_costs(trans_obs, trans_aux, counts, weights,
                            [0, 1], [0, 1])
    agg_prob, agg_count = markov_free_aggregate(trans_obs, counts, [0, 1])
    agg_aux = aux_free_aggregate(trans_aux, weights, [0, 1])
    for i in range(2):
        for j in range(2):
            want = -np.log(trans_aux[i, i]) * counts[j] * trans_obs[j, j]
            want -= np.log(agg_aux[i]) * agg_count[j] * agg_prob[j]
            assert d[i, j] == pytest.approx(want, rel=1e-12)


def test_markov_linear_rejects_zero_diagonal_aux():
    trans_aux = np.array([[0.0, 0.5], [1.0, 0.5]])
    with pytest.raises(ValueError):
        markov_linear_costs(np.eye(2), trans_aux, np.ones(2),
                            np.full(2, 0.5), [0, 1], [0, 1])


def test_markov_pair_zero_transitions_cost_nothing():
    trans_aux = np.full((3, 3), 1 / 3)
    trans_obs = np.zeros((3, 3))
    d = markov_pair_costs(trans_obs, trans_aux, np.zeros(3),
                          [0, 1], [0, 1], [2], [2])
    assert np.all(d == 0.0)


def test_markov_pair_counts_both_directions():
    rng = np.random.default_rng(12)
    n = 4
    trans_aux = rng.dirichlet(np.ones(n), size=n).T
    trans_obs = rng.dirichlet(np.ones(n), size=n).T
    counts = rng.integers(10, 50, size=n).astype(np.float64)
    free_kws = np.array([0, 1])
    free_toks = np.array([0, 1])
    fixed_kws = np.array([2, 3])
    fixed_toks = np.array([2, 3])
    d = markov_pair_costs(trans_obs, trans_aux, counts,
                          free_kws, free_toks, fixed_kws, fixed_toks)
    for r, i in enumerate(free_kws):
        for a, j in enumerate(free_toks):
            want = 0.0
            for b in range(2):
                jb, ib = fixed_toks[b], fixed_kws[b]
                # fixed token's successors hitting the free token
                want -= np.log(trans_aux[i, ib]) * trans_obs[j, jb] * counts[jb]
                # free token's successors hitting the fixed token
                want -= np.log(trans_aux[ib, i]) * trans_obs[jb, j] * counts[j]
            assert d[r, a] == pytest.approx(want, rel=1e-12)


def test_markov_pair_empty_fixed_set():
    d = markov_pair_costs(np.eye(2), np.full((2, 2), 0.5), np.ones(2),
                          [0, 1], [0, 1], [], [])
    assert d.shape == (2, 2)
    assert np.all(d == 0.0)


def test_sum_provider_adds_and_weights():
    rng = np.random.default_rng(13)
    n = 4
    obs = rng.uniform(0.1, 0.4, size=(n, n))
    obs = (obs + obs.T) / 2
    aux = rng.uniform(0.2, 0.8, size=(n, n))
    aux = (aux + aux.T) / 2
    f = rng.dirichlet(np.ones(n))
    ft = rng.dirichlet(np.ones(n))
    vol = VolumeCoefficients(obs, aux, 30)
    frq = IidFreqCoefficients(f, ft, 100)
    both = SumCoefficients([vol, frq], weights=[2.0, 0.5])
    kws, toks = np.arange(n), np.arange(n)
    want = 2.0 * vol.linear_costs(kws, toks) + 0.5 * frq.linear_costs(kws, toks)
    assert np.allclose(both.linear_costs(kws, toks), want)
    pair_want = 2.0 * vol.fixed_pair_costs(kws[:2], toks[:2], kws[2:], toks[2:])
    got = both.fixed_pair_costs(kws[:2], toks[:2], kws[2:], toks[2:])
    assert np.allclose(got, pair_want)  # freq pair costs are identically zero


def test_sum_provider_rejects_mixed_shapes():
    a = IidFreqCoefficients(np.full(3, 1 / 3), np.full(3, 1 / 3), 10)
    b = IidFreqCoefficients(np.full(4, 1 / 4), np.full(4, 1 / 4), 10)
    with pytest.raises(ValueError):
        SumCoefficients([a, b])


def test_markov_provider_defaults_to_stationary_weights():
    trans_aux = np.array([[0.6, 0.2], [0.4, 0.8]])
    trans_obs = np.array([[0.5, 0.5], [0.5, 0.5]])
    counts = np.array([8.0, 8.0])
    prov = MarkovCoefficients(trans_obs, trans_aux, counts)
    from ihoplab.markov import stationary_distribution

    explicit = MarkovCoefficients(trans_obs, trans_aux, counts,
                                  aux_weights=stationary_distribution(trans_aux))
    kws, toks = np.arange(2), np.arange(2)
    assert np.allclose(prov.linear_costs(kws, toks),
                       explicit.linear_costs(kws, toks))
