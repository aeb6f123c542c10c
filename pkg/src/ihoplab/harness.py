"""Experiment orchestration: seeded repetitions, sweeps, CSV results.

One repetition is a pure function of its derived seed: it samples a keyword
universe and a document split, simulates the scenario (and defense), computes
the observation statistics, runs one attack single-threaded, and scores it.
Sweep specs expand into configuration lists whose rows land in a CSV with a
fixed header.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import os
import time
from dataclasses import dataclass, fields

import numpy as np

from .baselines import IkkConfig, freq_attack, ikk_attack, sap_attack
from .defenses import (
    ObfuscationParams,
    clrz_apply,
    expected_obfuscated_volume,
    osse_cluster,
    osse_observed_volume,
    osse_pattern_fn,
)
from .ihop import IhopConfig, ihop_run
from .markov import sample_queries_iid, sample_queries_markov, stationary_distribution
from .model import DocumentCollection, accuracy
from .pancake import pancake_attack, pancake_simulate
from .pipeline import (
    generate_synthetic,
    make_cycle_chain,
    make_iid_chain,
    make_skewed_cycle_chain,
    zipf_frequencies,
)
from .sim import simulate_s1, simulate_s2, simulate_s3
from .stats import (
    AuxStats,
    LeakageStats,
    aux_from_documents,
    compute_observed_freq,
    compute_observed_volume,
    smooth_freq,
    smooth_trans,
)

ATTACKS = ("ihop", "sap", "freq", "ikk")
DEFENSES = ("none", "clrz", "osse", "pancake")
AUX_MODES = ("split", "self")
CHAINS = ("skewed_cycle", "cycle", "iid")

CSV_HEADER = (
    "scenario,attack,defense,n,N_d,N_aux,rho,n_iters,p_free,alpha,"
    "tpr,fpr,rep,seed,accuracy,runtime_s"
)


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment configuration (before repetition expansion)."""

    scenario: str = "S1"
    attack: str = "ihop"
    defense: str = "none"
    n: int = 100
    N_d: int = 5000
    N_aux: int = 5000
    rho: int = 0
    # data source: a saved DocumentCollection, or the synthetic generator
    corpus: str | None = None
    universe_n: int | None = None
    zipf_exponent: float = 1.0
    mixing: float = 0.5
    avg_doc_len: float | None = None
    aux: str = "split"
    # query model
    freq_exponent: float = 1.0
    chain: str = "skewed_cycle"
    advance_prob: float = 0.9
    # attack parameters
    n_iters: int = 1000
    p_free: float = 0.25
    alpha: float = 0.5
    ikk_t0: float = 100.0
    ikk_cooling: float = 0.99995
    ikk_t_min: float = 1e-10
    # defense parameters
    tpr: float = 0.999
    fpr: float = 0.01
    repetitions: int = 30
    base_seed: int = 0

    def validate(self) -> None:
        if self.scenario not in ("S1", "S2", "S3"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.attack not in ATTACKS:
            raise ValueError(f"unknown attack {self.attack!r}")
        if self.defense not in DEFENSES:
            raise ValueError(f"unknown defense {self.defense!r}")
        if self.aux not in AUX_MODES:
            raise ValueError(f"aux must be one of {AUX_MODES}")
        if self.chain not in CHAINS:
            raise ValueError(f"chain must be one of {CHAINS}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.universe_n is not None and self.universe_n < self.n:
            raise ValueError("universe_n must be at least n")
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")

        if self.scenario == "S1":
            if self.rho != 0:
                raise ValueError("S1 leaks no queries; rho must be 0")
            if self.attack == "freq":
                raise ValueError("freq attack needs observed queries")
            if self.defense not in ("none", "clrz"):
                raise ValueError(f"defense {self.defense!r} not valid in S1")
        elif self.scenario == "S2":
            if self.rho < 1:
                raise ValueError("S2 needs rho >= 1 queries")
            if self.defense not in ("none", "clrz", "osse"):
                raise ValueError(f"defense {self.defense!r} not valid in S2")
        else:  # S3
            if self.rho < 2:
                raise ValueError("S3 needs rho >= 2 queries")
            if self.attack not in ("ihop", "freq"):
                raise ValueError("S3 has no volume leakage; use ihop or freq")
            if self.defense not in ("none", "pancake"):
                raise ValueError(f"defense {self.defense!r} not valid in S3")
            if self.defense == "pancake" and self.attack != "ihop":
                raise ValueError("the replica-level attack runs through ihop")
        if self.scenario != "S3":
            if self.N_d < 1:
                raise ValueError("need client documents")
            if self.aux == "split" and self.N_aux < 1:
                raise ValueError("split aux mode needs auxiliary documents")
        # constructor validation for the nested parameter objects
        ObfuscationParams(tpr=self.tpr, fpr=self.fpr).validate()
        IkkConfig(
            t0=self.ikk_t0, cooling=self.ikk_cooling, t_min=self.ikk_t_min
        ).validate()
        IhopConfig(n_iters=self.n_iters, p_free=self.p_free).validate()


@dataclass
class ResultRow:
    """One repetition outcome, flattened for the results CSV."""

    scenario: str
    attack: str
    defense: str
    n: int
    N_d: int
    N_aux: int
    rho: int
    n_iters: int
    p_free: float
    alpha: float
    tpr: float
    fpr: float
    rep: int
    seed: int
    accuracy: float
    runtime_s: float

    def csv_values(self):
        return [
            self.scenario, self.attack, self.defense, str(self.n),
            str(self.N_d), str(self.N_aux), str(self.rho), str(self.n_iters),
            repr(self.p_free), repr(self.alpha), repr(self.tpr),
            repr(self.fpr), str(self.rep), str(self.seed),
            repr(self.accuracy), repr(self.runtime_s),
        ]


def rep_seed(base_seed: int, rep: int) -> int:
    """Stable per-repetition seed: the first 8 bytes of
    sha256(f"{base_seed}:{rep}"), masked to 63 bits.

    Extending a sweep or reordering configurations never changes the seed of
    an existing (base_seed, rep) pair.
    """
    digest = hashlib.sha256(f"{base_seed}:{rep}".encode()).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)


def _sample_universe_docs(spec: ExperimentSpec, docs_all, rng):
    """Sample the keyword universe and split documents into client and aux."""
    if docs_all is not None:
        available = docs_all.num_keywords
        if available < spec.n:
            raise ValueError(
                f"corpus offers {available} keywords, spec wants {spec.n}"
            )
        pool = docs_all
    else:
        available = spec.universe_n if spec.universe_n is not None else spec.n
        total_docs = spec.N_d + (spec.N_aux if spec.aux == "split" else 0)
        pool = generate_synthetic(
            available,
            total_docs,
            zipf_exponent=spec.zipf_exponent,
            co_occurrence_mixing=spec.mixing,
            avg_doc_len=spec.avg_doc_len,
            seed=rng,
        )
    chosen = np.sort(rng.choice(available, size=spec.n, replace=False))
    pool = pool.subset_keywords(chosen)

    needed = spec.N_d + (spec.N_aux if spec.aux == "split" else 0)
    if pool.num_docs < needed:
        raise ValueError(
            f"need {needed} documents, collection has {pool.num_docs}"
        )
    order = rng.permutation(pool.num_docs)
    client = pool.subset_docs(order[: spec.N_d])
    if spec.aux == "self":
        aux = client
    else:
        aux = pool.subset_docs(order[spec.N_d : spec.N_d + spec.N_aux])
    return client, aux


def _query_model(spec: ExperimentSpec):
    """Real-world query law for the scenario: (freqs, transition or None)."""
    if spec.scenario == "S3":
        if spec.chain == "skewed_cycle":
            # strongest advance at the top state, advance_prob, weakest at
            # half of it; see make_skewed_cycle_chain for why pure cycles
            # are unrecoverable
            trans = make_skewed_cycle_chain(
                spec.n, spec.advance_prob / 2.0, spec.advance_prob
            )
        elif spec.chain == "cycle":
            trans = make_cycle_chain(spec.n, spec.advance_prob)
        else:
            trans = make_iid_chain(zipf_frequencies(spec.n, spec.freq_exponent))
        return stationary_distribution(trans), trans
    return zipf_frequencies(spec.n, spec.freq_exponent), None


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def _run_s1_s2(spec: ExperimentSpec, docs_all, rng):
    """Document-leakage scenarios; returns (accuracy, runtime)."""
    docs_client, docs_aux = _sample_universe_docs(spec, docs_all, rng)
    params = ObfuscationParams(tpr=spec.tpr, fpr=spec.fpr)
    f_real, _ = _query_model(spec)

    if spec.defense == "clrz":
        docs_client = clrz_apply(docs_client, params, rng)

    aux = aux_from_documents(docs_aux)
    aux_volume = aux.volume
    # ihop and sap attack the defended index with the predicted obfuscated
    # volumes; ikk runs unadapted
    if spec.defense in ("clrz", "osse") and spec.attack in ("ihop", "sap"):
        aux_volume = expected_obfuscated_volume(aux.volume, aux.volume_not, params)

    if spec.scenario == "S1":
        obs = simulate_s1(docs_client, rng)
        volume = compute_observed_volume(obs.trace.token_patterns, spec.N_d)
        leakage = LeakageStats(
            num_docs=spec.N_d, query_count=0, volume=volume
        )
        attack_aux = AuxStats(num_docs=aux.num_docs, volume=aux_volume)
        truth_pairs = None
    else:
        query_seq = sample_queries_iid(f_real, spec.rho, rng)
        if spec.defense == "osse":
            obs = simulate_s2(
                docs_client, query_seq, rng,
                pattern_fn=osse_pattern_fn(docs_client, params),
            )
            m = obs.truth.size
            labels, clusters = osse_cluster(obs.trace.query_patterns, m)
            volume = osse_observed_volume(clusters, spec.N_d)
            freq, trans, counts = compute_observed_freq(labels, m)
            truth_pairs = (labels, query_seq)
        else:
            obs = simulate_s2(docs_client, query_seq, rng)
            volume = compute_observed_volume(
                obs.trace.token_patterns, spec.N_d
            )
            freq, trans, counts = compute_observed_freq(
                obs.trace.query_tokens, obs.truth.size
            )
            truth_pairs = None
        leakage = LeakageStats(
            num_docs=spec.N_d,
            query_count=spec.rho,
            volume=volume,
            freq=freq,
            trans=trans,
            token_counts=counts,
        )
        attack_aux = AuxStats(
            num_docs=aux.num_docs, volume=aux_volume, freq=smooth_freq(f_real)
        )

    if spec.attack == "ihop":
        mode = "volume" if spec.scenario == "S1" else "volume+freq_iid"
        config = IhopConfig(
            n_iters=spec.n_iters,
            p_free=spec.p_free,
            seed=int(rng.integers(2**63)),
            coefficient_mode=mode,
        )
        assign, runtime = _timed(ihop_run, leakage, attack_aux, config)
    elif spec.attack == "sap":
        assign, runtime = _timed(sap_attack, leakage, attack_aux, spec.alpha)
    elif spec.attack == "freq":
        assign, runtime = _timed(freq_attack, leakage.freq, attack_aux.freq)
    else:
        config = IkkConfig(
            t0=spec.ikk_t0,
            cooling=spec.ikk_cooling,
            t_min=spec.ikk_t_min,
            seed=int(rng.integers(2**63)),
        )
        assign, runtime = _timed(
            ikk_attack, leakage.volume, aux.volume, config
        )

    if truth_pairs is not None:
        labels, query_seq = truth_pairs
        score = float(np.mean(assign[labels] == query_seq))
    else:
        score = accuracy(assign, obs.truth)
    return score, runtime


def _run_s3(spec: ExperimentSpec, rng):
    """Query-sequence scenarios; returns (accuracy, runtime)."""
    f_real, trans_real = _query_model(spec)
    trans_aux = smooth_trans(trans_real)

    if spec.defense == "pancake":
        run = pancake_simulate(
            trans_real, spec.rho, seed=int(rng.integers(2**63))
        )
        config = IhopConfig(
            n_iters=spec.n_iters,
            p_free=spec.p_free,
            seed=int(rng.integers(2**63)),
            coefficient_mode="pancake",
        )
        result, runtime = _timed(pancake_attack, run.tokens, trans_aux, config)
        score = float(
            np.mean(result.keyword_assign == run.state.slot_keywords)
        )
        return score, runtime

    query_seq = sample_queries_markov(trans_real, spec.rho, rng)
    obs = simulate_s3(query_seq, rng)
    m = obs.truth.size
    freq, trans, counts = compute_observed_freq(obs.trace.query_tokens, m)
    leakage = LeakageStats(
        num_docs=0,
        query_count=spec.rho,
        freq=freq,
        trans=trans,
        token_counts=counts,
    )
    attack_aux = AuxStats(freq=smooth_freq(f_real), trans=trans_aux)
    if spec.attack == "ihop":
        config = IhopConfig(
            n_iters=spec.n_iters,
            p_free=spec.p_free,
            seed=int(rng.integers(2**63)),
            coefficient_mode="markov",
        )
        assign, runtime = _timed(ihop_run, leakage, attack_aux, config)
    else:
        assign, runtime = _timed(freq_attack, leakage.freq, attack_aux.freq)
    return accuracy(assign, obs.truth), runtime


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """All repetitions of one configuration, sequentially.

    Every repetition derives its whole randomness from rep_seed(base_seed,
    rep), so rows are reproducible independently of execution order.
    """
    spec.validate()
    docs_all = DocumentCollection.load(spec.corpus) if spec.corpus else None
    rows = []
    for rep in range(spec.repetitions):
        seed = rep_seed(spec.base_seed, rep)
        rng = np.random.default_rng(seed)
        if spec.scenario == "S3":
            score, runtime = _run_s3(spec, rng)
        else:
            score, runtime = _run_s1_s2(spec, docs_all, rng)
        rows.append(
            ResultRow(
                scenario=spec.scenario,
                attack=spec.attack,
                defense=spec.defense,
                n=spec.n,
                N_d=spec.N_d if spec.scenario != "S3" else 0,
                N_aux=spec.N_aux
                if spec.scenario != "S3" and spec.aux == "split"
                else 0,
                rho=spec.rho,
                n_iters=spec.n_iters,
                p_free=spec.p_free,
                alpha=spec.alpha,
                tpr=spec.tpr,
                fpr=spec.fpr,
                rep=rep,
                seed=seed,
                accuracy=score,
                runtime_s=runtime,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# spec files

_INT_KEYS = {
    "n", "universe_n", "N_d", "N_aux", "rho", "n_iters", "repetitions",
    "base_seed",
}
_FLOAT_KEYS = {
    "zipf_exponent", "mixing", "avg_doc_len", "freq_exponent", "advance_prob",
    "p_free", "alpha", "ikk_t0", "ikk_cooling", "ikk_t_min", "tpr", "fpr",
}
_STR_KEYS = {"scenario", "attack", "defense", "aux", "corpus", "chain"}
_OPTIONAL_KEYS = {"universe_n", "avg_doc_len", "corpus"}


def _coerce(key: str, raw: str, lineno: int):
    raw = raw.strip()
    if key in _OPTIONAL_KEYS and raw.lower() == "none":
        return None
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ValueError(
            f"line {lineno}: key {key!r} needs a number, got {raw!r}"
        ) from None
    return raw


def parse_spec_file(path) -> list[ExperimentSpec]:
    """Parse a key=value sweep file into experiment configurations.

    Unknown keys and duplicates are rejected with their line number.  A value
    of comma-separated entries (optionally in [brackets]) sweeps that key;
    multiple swept keys expand to their cross product, ordered by first
    appearance in the file.
    """
    valid = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS
    sweeps: dict[str, list] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"line {lineno}: expected key = value")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in valid:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            if key in sweeps:
                raise ValueError(f"line {lineno}: duplicate key {key!r}")
            raw = raw.split("#", 1)[0].strip()
            if raw.startswith("[") and raw.endswith("]"):
                raw = raw[1:-1]
            values = [v for v in (part.strip() for part in raw.split(",")) if v]
            if not values:
                raise ValueError(f"line {lineno}: key {key!r} has no value")
            sweeps[key] = [_coerce(key, v, lineno) for v in values]

    keys = list(sweeps)
    specs = []
    for combo in itertools.product(*(sweeps[k] for k in keys)):
        spec = ExperimentSpec(**dict(zip(keys, combo)))
        spec.validate()
        specs.append(spec)
    return specs


def write_rows(path, rows, append: bool = True) -> None:
    """Append result rows to a CSV, creating the fixed header as needed."""
    exists = os.path.exists(path) and os.path.getsize(path) > 0
    if exists:
        with open(path, encoding="utf-8") as fh:
            first = fh.readline().strip()
        if first != CSV_HEADER:
            raise ValueError(f"{path} does not carry the expected header")
    mode = "a" if (append and exists) else "w"
    with open(path, mode, encoding="utf-8") as fh:
        if mode == "w":
            fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(",".join(row.csv_values()) + "\n")


def read_rows(path) -> list[ResultRow]:
    """Load a results CSV back into typed rows."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} does not carry the expected header")
    names = CSV_HEADER.split(",")
    types = {f.name: f.type for f in fields(ResultRow)}
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(names):
            raise ValueError(f"line {lineno}: expected {len(names)} columns")
        kwargs = {}
        for name, raw in zip(names, parts):
            kind = types[name]
            if kind == "int":
                kwargs[name] = int(raw)
            elif kind == "float":
                kwargs[name] = float(raw)
            else:
                kwargs[name] = raw
        rows.append(ResultRow(**kwargs))
    return rows


_CONFIG_FIELDS = (
    "scenario", "attack", "defense", "n", "N_d", "N_aux", "rho",
    "n_iters", "p_free", "alpha", "tpr", "fpr",
)

SUMMARY_HEADER = ",".join(_CONFIG_FIELDS) + (
    ",reps,accuracy_mean,accuracy_ci95,ci_defined,runtime_s_mean"
)


def summarize(rows):
    """Group rows by configuration and reduce to mean accuracy with a 95%
    normal-approximation half-width (1.96 * s / sqrt(k)).

    A single-row group has no sample deviation; its half-width is reported
    as 0.0 and flagged.  Returns a list of dicts in first-appearance order.
    """
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        key = tuple(getattr(row, f) for f in _CONFIG_FIELDS)
        groups.setdefault(key, []).append(row)
    out = []
    for key, members in groups.items():
        acc = np.asarray([r.accuracy for r in members], dtype=np.float64)
        runtimes = np.asarray([r.runtime_s for r in members], dtype=np.float64)
        k = acc.size
        if k > 1:
            half = 1.96 * float(np.std(acc, ddof=1)) / math.sqrt(k)
            defined = True
        else:
            half = 0.0
            defined = False
        entry = dict(zip(_CONFIG_FIELDS, key))
        entry.update(
            reps=k,
            accuracy_mean=float(acc.mean()),
            accuracy_ci95=half,
            ci_defined=defined,
            runtime_s_mean=float(runtimes.mean()),
        )
        out.append(entry)
    return out


def write_summary(path_or_file, entries) -> None:
    """Summary table as CSV; pass '-' style file objects for stdout."""
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", encoding="utf-8") if own else path_or_file
    try:
        fh.write(SUMMARY_HEADER + "\n")
        for e in entries:
            values = [str(e[f]) for f in _CONFIG_FIELDS]
            values += [
                str(e["reps"]),
                repr(e["accuracy_mean"]),
                repr(e["accuracy_ci95"]),
                "true" if e["ci_defined"] else "false",
                repr(e["runtime_s_mean"]),
            ]
            fh.write(",".join(values) + "\n")
    finally:
        if own:
            fh.close()
