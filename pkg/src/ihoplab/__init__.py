"""Query-recovery attack laboratory for encrypted-search leakage.

The package simulates what an honest-but-curious server observes from a
searchable-encryption client (access patterns, query sequences), runs
recovery attacks against those observations under auxiliary knowledge, and
measures them with and without countermeasures.
"""

from ._backend import ENV_VAR as BACKEND_ENV_VAR
from ._backend import backend_choice, numba_available, use_numba
from .baselines import IkkConfig, freq_attack, ikk_attack, sap_attack
from .defenses import (
    ObfuscationParams,
    clrz_apply,
    expected_obfuscated_volume,
    osse_cluster,
    osse_observed_volume,
    osse_pattern_fn,
    osse_query,
)
from .harness import (
    CSV_HEADER,
    ExperimentSpec,
    ResultRow,
    parse_spec_file,
    read_rows,
    rep_seed,
    run_experiment,
    summarize,
    write_rows,
    write_summary,
)
from .ihop import (
    COEFFICIENT_MODES,
    IhopConfig,
    build_provider,
    ihop_run,
    qap_objective,
    solve_linear_step,
)
from .lap import (
    lap_objective,
    lap_selftest,
    solve_lap_bruteforce,
    solve_lap_min,
)
from .markov import (
    check_transition_matrix,
    sample_queries_iid,
    sample_queries_markov,
    stationary_distribution,
)
from .model import (
    DocumentCollection,
    ObservationTrace,
    SimulatedObservation,
    accuracy,
    is_injective,
)
from .pancake import (
    PancakeRun,
    PancakeState,
    pancake_attack,
    pancake_expected_trans,
    pancake_observed_trans,
    pancake_setup,
    pancake_simulate,
)
from .pipeline import (
    CorpusConfig,
    TransitionGraph,
    build_markov_from_graph,
    generate_synthetic,
    load_click_graph,
    load_frequency_table,
    load_stopwords,
    make_cycle_chain,
    make_iid_chain,
    make_skewed_cycle_chain,
    preprocess_corpus,
    select_universe_from_graph,
    split_halves,
    zipf_frequencies,
)
from .porter import porter_stem
from .sim import simulate_s1, simulate_s2, simulate_s3
from .stats import (
    AuxStats,
    LeakageStats,
    aux_from_documents,
    compute_observed_freq,
    compute_observed_volume,
    smooth_aux_volume,
    smooth_freq,
    smooth_trans,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_ENV_VAR",
    "backend_choice",
    "numba_available",
    "use_numba",
    "IkkConfig",
    "freq_attack",
    "ikk_attack",
    "sap_attack",
    "ObfuscationParams",
    "clrz_apply",
    "expected_obfuscated_volume",
    "osse_cluster",
    "osse_observed_volume",
    "osse_pattern_fn",
    "osse_query",
    "CSV_HEADER",
    "ExperimentSpec",
    "ResultRow",
    "parse_spec_file",
    "read_rows",
    "rep_seed",
    "run_experiment",
    "summarize",
    "write_rows",
    "write_summary",
    "COEFFICIENT_MODES",
    "IhopConfig",
    "build_provider",
    "ihop_run",
    "qap_objective",
    "solve_linear_step",
    "lap_objective",
    "lap_selftest",
    "solve_lap_bruteforce",
    "solve_lap_min",
    "check_transition_matrix",
    "sample_queries_iid",
    "sample_queries_markov",
    "stationary_distribution",
    "DocumentCollection",
    "ObservationTrace",
    "SimulatedObservation",
    "accuracy",
    "is_injective",
    "PancakeRun",
    "PancakeState",
    "pancake_attack",
    "pancake_expected_trans",
    "pancake_observed_trans",
    "pancake_setup",
    "pancake_simulate",
    "CorpusConfig",
    "TransitionGraph",
    "build_markov_from_graph",
    "generate_synthetic",
    "load_click_graph",
    "load_frequency_table",
    "load_stopwords",
    "make_cycle_chain",
    "make_iid_chain",
    "make_skewed_cycle_chain",
    "preprocess_corpus",
    "select_universe_from_graph",
    "split_halves",
    "zipf_frequencies",
    "porter_stem",
    "simulate_s1",
    "simulate_s2",
    "simulate_s3",
    "AuxStats",
    "LeakageStats",
    "aux_from_documents",
    "compute_observed_freq",
    "compute_observed_volume",
    "smooth_aux_volume",
    "smooth_freq",
    "smooth_trans",
    "__version__",
]
