"""Compare the compiled kernels against their pure-numpy twins.

Runs each hot kernel under IHOPLAB_BACKEND=numba and =numpy on the same
inputs, prints best-of-k wall times and the speedup.  Compilation happens
during warmup so the numbers reflect steady-state throughput.

    python3 benchmarks/bench_backends.py [--repeats 5]
"""

import argparse
import os
import time

import numpy as np

from ihoplab._backend import ENV_VAR, numba_available
from ihoplab._gram import gram_counts
from ihoplab.baselines import IkkConfig, ikk_attack
from ihoplab.lap import solve_lap_min
from ihoplab.pancake import pancake_simulate
from ihoplab.pipeline import make_skewed_cycle_chain


def _bench(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases():
    rng = np.random.default_rng(2022)
    mat = rng.random((20000, 500)) < 0.05
    yield "gram 20000x500 docs", lambda: gram_counts(mat)

    cost = rng.normal(size=(1000, 1000))
    yield "assignment 1000x1000", lambda: solve_lap_min(cost)

    n = 60
    obs = rng.random((n, n))
    obs = (obs + obs.T) / 2
    aux = obs + rng.normal(scale=0.01, size=(n, n))
    aux = (aux + aux.T) / 2
    config = IkkConfig(t0=10.0, cooling=0.9995, t_min=1e-3, seed=1)
    yield (f"anneal {n} kws, {config.num_steps()} steps",
           lambda: ikk_attack(obs, aux, config=config))

    chain = make_skewed_cycle_chain(50, 0.4, 0.85)
    yield ("replica protocol 200k queries",
           lambda: pancake_simulate(chain, 200_000, seed=3))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not numba_available():
        print("numba is not importable, nothing to compare")
        return 1

    print(f"{'kernel':<36} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for label, fn in _cases():
        os.environ[ENV_VAR] = "numba"
        fn()  # compile outside the timed region
        t_numba = _bench(fn, args.repeats)
        os.environ[ENV_VAR] = "numpy"
        fn()
        t_numpy = _bench(fn, args.repeats)
        print(f"{label:<36} {t_numpy * 1e3:>8.1f}ms {t_numba * 1e3:>8.1f}ms "
              f"{t_numpy / t_numba:>8.1f}x")
    os.environ.pop(ENV_VAR, None)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
