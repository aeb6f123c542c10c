"""Frequency-smoothing defense: replicated keywords plus dummy queries.

Setup replicates each keyword proportionally to its query frequency and pads
with dummies so that 2n replica slots are queried uniformly at rate 1/(2n).
Each real query enqueues its keyword and emits three slots, each one an
unbiased coin: heads serves the oldest pending real query (or a fresh draw
from the real distribution when none is pending), tails draws from the dummy
distribution.

The adversary cannot use marginal frequencies (they are flat by design) but
consecutive emissions still correlate with the client's query chain.  The
attack predicts the slot-level successor matrix from an auxiliary keyword
chain and runs the iterative recovery in transition mode over slots.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from ._backend import use_numba
from .ihop import IhopConfig, ihop_run
from .markov import (
    check_transition_matrix,
    sample_queries_markov,
    stationary_distribution,
)
from .stats import AuxStats, LeakageStats, smooth_trans

# Split of consecutive emitted pairs by provenance, taken as given here and
# verified by Monte Carlo in the test suite: the second emission is a dummy
# draw half the time; else the first is a dummy draw with probability 1/4;
# the remaining quarter splits into at-least-one-fresh-draw versus both
# serving real queries.  When both are real, the second query follows the
# first in the client's sequence at offset 1, 2 or 3 with the weights below.
PROB_SECOND_DUMMY = 0.5
PROB_FIRST_DUMMY_ONLY = 0.25
PROB_ANY_FRESH = 0.145
PROB_BOTH_REAL = 0.105
REAL_OFFSET_WEIGHTS = (0.81, 0.17, 0.02)


@dataclass
class PancakeState:
    """Replica layout and sampling tables for one protocol instance.

    Index num_keywords in replica_counts and freq_dummy is the pure dummy
    keyword; slot_keywords maps each of the 2n slots to its keyword (possibly
    the dummy).  pending holds enqueued real queries for the step API.
    """

    num_keywords: int
    freq_real: np.ndarray  # (n,)
    replica_counts: np.ndarray  # (n + 1,) ints
    freq_dummy: np.ndarray  # (n + 1,)
    slot_keywords: np.ndarray  # (2n,)
    slot_start: np.ndarray  # (n + 2,) offsets into slot_list
    slot_list: np.ndarray  # (2n,) slots grouped by keyword

    def __post_init__(self):
        self.pending = []

    @property
    def num_slots(self) -> int:
        return 2 * self.num_keywords


def pancake_setup(freq_real: np.ndarray, rng=None) -> PancakeState:
    """Build the replica layout for a real query distribution.

    Each keyword gets max(1, ceil(n * freq)) replicas, dummies fill up to 2n,
    and the dummy distribution tops every keyword up to its replica budget so
    that real plus dummy traffic hits every slot at the uniform 1/(2n) rate.
    With rng given the slots are dealt in shuffled order (the server's view);
    without it they are grouped by keyword (the adversary's own bookkeeping,
    where the layout is arbitrary anyway).
    """
    f = np.asarray(freq_real, dtype=np.float64)
    n = f.size
    if f.ndim != 1 or n < 2:
        raise ValueError("need a 1-d distribution over at least 2 keywords")
    if np.any(f < 0) or np.any(f >= 1) or abs(f.sum() - 1.0) > 1e-9:
        raise ValueError("frequencies must be a distribution with entries < 1")
    scaled = n * f
    replicas = np.maximum(1, np.ceil(scaled - 1e-9)).astype(np.int64)
    # the guard above absorbs upward float drift past an integer; make sure
    # it never pushed a count below the true ceiling
    replicas[replicas < scaled] += 1
    total = int(replicas.sum())
    if total > 2 * n:
        raise ValueError("replica budget exceeded")
    counts = np.concatenate([replicas, [2 * n - total]])
    freq_dummy = counts / n
    freq_dummy[:n] -= f
    # algebraically the dummy keyword's rate is 1 minus the others; write it
    # as that residual, then nudge it until the correctly rounded total is
    # exactly one (two corrections suffice, the loop is a safety margin)
    freq_dummy[n] = 1.0 - math.fsum(freq_dummy[:n])
    for _ in range(4):
        err = 1.0 - math.fsum(freq_dummy)
        if err == 0.0:
            break
        freq_dummy[n] += err
    slot_start = np.zeros(n + 2, dtype=np.int64)
    slot_start[1:] = np.cumsum(counts)
    slot_list = np.arange(2 * n, dtype=np.int64)
    slot_keywords = np.repeat(np.arange(n + 1, dtype=np.int64), counts)
    if rng is not None:
        rng = np.random.default_rng(rng)
        perm = rng.permutation(2 * n)
        # slot ids are dealt by perm; regroup the per-keyword slot lists
        slot_keywords = np.empty(2 * n, dtype=np.int64)
        slot_keywords[perm] = np.repeat(np.arange(n + 1, dtype=np.int64), counts)
        slot_list = perm
    return PancakeState(
        num_keywords=n,
        freq_real=f,
        replica_counts=counts,
        freq_dummy=freq_dummy,
        slot_keywords=slot_keywords,
        slot_start=slot_start,
        slot_list=slot_list,
    )


def _cumulative(dist: np.ndarray) -> np.ndarray:
    cum = np.cumsum(dist)
    cum[-1] = 1.0
    return cum


def pancake_query_step(state: PancakeState, keyword: int, rng) -> np.ndarray:
    """Serve one real query: enqueue it and emit three slots.

    Draws three uniforms per emission (coin, keyword, replica) whether or not
    a branch needs them, matching the batch simulator draw for draw.
    """
    if not (0 <= keyword < state.num_keywords):
        raise ValueError("keyword out of range")
    rng = np.random.default_rng(rng)
    cum_real = _cumulative(np.concatenate([state.freq_real, [0.0]]))
    cum_dummy = _cumulative(state.freq_dummy)
    state.pending.append(int(keyword))
    out = np.empty(3, dtype=np.int64)
    for c in range(3):
        u_coin = rng.random()
        u_kw = rng.random()
        u_rep = rng.random()
        if u_coin < 0.5:
            if state.pending:
                kw = state.pending.pop(0)
            else:
                kw = int(np.searchsorted(cum_real, u_kw, side="right"))
        else:
            kw = int(np.searchsorted(cum_dummy, u_kw, side="right"))
        lo = state.slot_start[kw]
        hi = state.slot_start[kw + 1]
        s = min(lo + int(u_rep * (hi - lo)), hi - 1)
        out[c] = state.slot_list[s]
    return out


@dataclass
class PancakeRun:
    """A simulated transcript plus the hidden provenance used for scoring and
    for the Monte Carlo checks of the pair-provenance constants."""

    state: PancakeState
    query_seq: np.ndarray  # (rho,) real keyword sequence
    tokens: np.ndarray  # (rho, 3) emitted slots
    branches: np.ndarray  # (rho, 3) 0 served, 1 fresh real draw, 2 dummy draw
    real_indices: np.ndarray  # (rho, 3) query_seq index when served, else -1


def pancake_simulate(trans_real: np.ndarray, num_queries: int, seed) -> PancakeRun:
    """Drive a client chain through the protocol.

    The real distribution is the chain's stationary one.  Three independent
    substreams are derived from the seed: the query chain, the slot shuffle
    and the protocol draws.
    """
    trans_real = check_transition_matrix(trans_real)
    if num_queries < 1:
        raise ValueError("need at least one query")
    ss = np.random.SeedSequence(seed)
    chain_rng, setup_rng, proto_rng = [
        np.random.default_rng(child) for child in ss.spawn(3)
    ]
    freq_real = stationary_distribution(trans_real)
    state = pancake_setup(freq_real, rng=setup_rng)
    query_seq = sample_queries_markov(trans_real, num_queries, chain_rng)
    draws = proto_rng.random((num_queries, 3, 3))
    n = state.num_keywords
    cum_real = _cumulative(np.concatenate([state.freq_real, [0.0]]))
    cum_dummy = _cumulative(state.freq_dummy)
    tokens = np.empty((num_queries, 3), dtype=np.int64)
    branches = np.empty((num_queries, 3), dtype=np.int8)
    real_indices = np.empty((num_queries, 3), dtype=np.int64)
    if use_numba():
        from . import _pancake_numba

        _pancake_numba.protocol(
            query_seq, cum_real, cum_dummy, state.slot_start, state.slot_list,
            draws, tokens, branches, real_indices,
        )
    else:
        _protocol_python(
            query_seq, cum_real, cum_dummy, state.slot_start, state.slot_list,
            draws, tokens, branches, real_indices,
        )
    return PancakeRun(
        state=state,
        query_seq=query_seq,
        tokens=tokens,
        branches=branches,
        real_indices=real_indices,
    )


def _protocol_python(
    query_seq, cum_real, cum_dummy, slot_start, slot_list, draws,
    tokens, branches, real_indices,
):
    """Pure-python twin of the protocol kernel."""
    num_queries = query_seq.shape[0]
    buffer = np.empty(num_queries + 1, dtype=np.int64)
    head = 0
    tail = 0
    for r in range(num_queries):
        buffer[tail] = r
        tail += 1
        for c in range(3):
            u_coin = draws[r, c, 0]
            u_kw = draws[r, c, 1]
            u_rep = draws[r, c, 2]
            if u_coin < 0.5:
                if head < tail:
                    ridx = buffer[head]
                    head += 1
                    kw = query_seq[ridx]
                    branch = 0
                else:
                    kw = int(np.searchsorted(cum_real, u_kw, side="right"))
                    ridx = -1
                    branch = 1
            else:
                kw = int(np.searchsorted(cum_dummy, u_kw, side="right"))
                ridx = -1
                branch = 2
            lo = slot_start[kw]
            hi = slot_start[kw + 1]
            s = min(lo + int(u_rep * (hi - lo)), hi - 1)
            tokens[r, c] = slot_list[s]
            branches[r, c] = branch
            real_indices[r, c] = ridx


def pancake_observed_trans(triples: np.ndarray, num_tokens: int):
    """Successor statistics over a triple transcript.

    Every slot of a triple counts as a successor of every slot of the
    previous triple.  Returns (freq, trans, counts): freq is each token's
    share of all emissions, trans the column-normalized successor matrix and
    counts each token's total outgoing pair count, so counts[j] * trans[:, j]
    recovers the raw pair counts.
    """
    triples = np.asarray(triples, dtype=np.int64)
    if triples.ndim != 2 or triples.shape[1] != 3 or triples.shape[0] < 2:
        raise ValueError("need at least two triples of slots")
    if triples.min() < 0 or triples.max() >= num_tokens:
        raise ValueError("slot id out of range")
    prev = triples[:-1]
    nxt = triples[1:]
    flat = (nxt[:, :, None] * num_tokens + prev[:, None, :]).ravel()
    pairs = np.bincount(flat, minlength=num_tokens * num_tokens).astype(np.float64)
    pairs = pairs.reshape(num_tokens, num_tokens)
    counts = pairs.sum(axis=0)
    trans = np.zeros_like(pairs)
    nonzero = counts > 0
    trans[:, nonzero] = pairs[:, nonzero] / counts[nonzero]
    freq = np.bincount(triples.ravel(), minlength=num_tokens).astype(np.float64)
    freq /= triples.size
    return freq, trans, counts


def pancake_expected_trans(trans_aux: np.ndarray):
    """Predicted slot-level successor matrix for an auxiliary keyword chain.

    Builds the adversary's own replica layout from the auxiliary stationary
    distribution, mixes the provenance cases of a consecutive emitted pair
    (dummy draws, fresh real draws, and served real queries one to three
    client steps apart), and spreads keyword probabilities uniformly over
    each keyword's replicas.  Returns (slot_trans, predicted_state).
    """
    trans_aux = check_transition_matrix(trans_aux)
    n = trans_aux.shape[0]
    freq_aux = stationary_distribution(trans_aux)
    state = pancake_setup(freq_aux, rng=None)
    padded = np.zeros((n + 1, n + 1))
    padded[:n, :n] = trans_aux
    padded[:n, n] = freq_aux  # a dummy draw does not advance the client chain
    freq_plus = np.concatenate([freq_aux, [0.0]])
    w1, w2, w3 = REAL_OFFSET_WEIGHTS
    chain_mix = w1 * padded + w2 * (padded @ padded) + w3 * (padded @ padded @ padded)
    keyword_pair = (
        PROB_BOTH_REAL * chain_mix
        + (PROB_FIRST_DUMMY_ONLY + PROB_ANY_FRESH) * np.outer(freq_plus, np.ones(n + 1))
        + PROB_SECOND_DUMMY * np.outer(state.freq_dummy, np.ones(n + 1))
    )
    kw_of_slot = state.slot_keywords
    reps = state.replica_counts[kw_of_slot].astype(np.float64)
    slot_trans = keyword_pair[np.ix_(kw_of_slot, kw_of_slot)] / reps[:, None]
    return slot_trans, state


@dataclass
class PancakeAttackResult:
    slot_assign: np.ndarray  # token -> predicted slot
    keyword_assign: np.ndarray  # token -> predicted keyword (n = dummy)
    predicted_state: PancakeState


def pancake_attack(
    triples: np.ndarray, trans_aux: np.ndarray, config: IhopConfig
) -> PancakeAttackResult:
    """Map observed slots to predicted slots by transition structure, then
    read keywords off the predicted layout."""
    trans_aux = check_transition_matrix(trans_aux)
    n = trans_aux.shape[0]
    num_slots = 2 * n
    freq, trans, counts = pancake_observed_trans(triples, num_slots)
    slot_trans, state = pancake_expected_trans(trans_aux)
    leakage = LeakageStats(
        num_docs=0,
        query_count=int(np.asarray(triples).size),
        freq=freq,
        trans=trans,
        token_counts=counts,
    )
    aux = AuxStats(trans=smooth_trans(slot_trans))
    if config.coefficient_mode != "pancake":
        config = replace(config, coefficient_mode="pancake")
    slot_assign = ihop_run(leakage, aux, config)
    keyword_assign = state.slot_keywords[slot_assign]
    return PancakeAttackResult(
        slot_assign=slot_assign,
        keyword_assign=keyword_assign,
        predicted_state=state,
    )


def save_triples(path, triples: np.ndarray) -> None:
    """Triple transcript as CSV rows step,slot,token_id."""
    triples = np.asarray(triples, dtype=np.int64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "slot", "token_id"])
        for r in range(triples.shape[0]):
            for c in range(3):
                writer.writerow([r, c, int(triples[r, c])])


def load_triples(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["step", "slot", "token_id"]:
            raise ValueError(f"unexpected triple header: {header}")
        cells = [(int(r), int(c), int(t)) for r, c, t in reader]
    if not cells:
        raise ValueError("empty transcript")
    num_steps = max(r for r, _, _ in cells) + 1
    out = np.full((num_steps, 3), -1, dtype=np.int64)
    for r, c, t in cells:
        out[r, c] = t
    if np.any(out < 0):
        raise ValueError("transcript has missing slots")
    return out
