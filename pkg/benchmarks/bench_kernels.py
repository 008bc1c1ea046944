"""Benchmark the numba kernels against the pure-numpy fallback.

Run without arguments to time both backends (each in a fresh subprocess so
the BBINF_BACKEND flag takes effect at import) and print a comparison:

    python benchmarks/bench_kernels.py

Measures the raw gain kernels plus full lazy-greedy and stochastic solves on
a mid-sized synthetic instance. The first numba call pays JIT compilation;
it is excluded by a warmup pass.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

SPEC = dict(n_users=2000, n_billboards=200, n_tags=40, n_tuples=8000, seed=42)
K, L, EPSILON = 50, 10, 0.1
REPEAT = 5


def _time(fn, repeat=REPEAT):
    fn()  # warmup (JIT compile, caches)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_single() -> dict:
    from bbinf import _kernels as kernels
    from bbinf.ingest import SyntheticSpec, generate_synthetic
    from bbinf.solvers import StochasticParams, orthant_greedy, stochastic_greedy

    inst = generate_synthetic(SyntheticSpec(**SPEC))
    q = inst.probs[:, inst.n_tags].copy()
    surv = np.random.default_rng(0).uniform(0.2, 1.0, inst.n_users)
    ids = np.arange(inst.n_slots, dtype=np.int64)

    out = {"backend": kernels.BACKEND,
           "n_slots": inst.n_slots, "n_pairs": inst.n_pairs}
    out["slot_gains_all_ms"] = 1e3 * _time(
        lambda: kernels.slot_gains_all(inst.vis_indptr, inst.vis_users, q, surv))
    out["slot_gains_subset_ms"] = 1e3 * _time(
        lambda: kernels.slot_gains_subset(ids[::7], inst.vis_indptr,
                                          inst.vis_users, q, surv))
    out["lazy_solve_ms"] = 1e3 * _time(
        lambda: orthant_greedy(inst, K, L, mode="lazy"), repeat=3)
    out["stochastic_solve_ms"] = 1e3 * _time(
        lambda: stochastic_greedy(inst, K, L, StochasticParams(EPSILON, seed=1)),
        repeat=3)
    return out


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--single", choices=["numba", "numpy"],
                    help="run one backend and print JSON (internal)")
    args = ap.parse_args()
    if args.single:
        os.environ.setdefault("BBINF_BACKEND", args.single)
        print(json.dumps(run_single()))
        return 0

    results = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, BBINF_BACKEND=backend)
        proc = subprocess.run([sys.executable, __file__, "--single", backend],
                              env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            print(proc.stderr, file=sys.stderr)
            return proc.returncode
        results[backend] = json.loads(proc.stdout.strip().splitlines()[-1])

    nb, npy = results["numba"], results["numpy"]
    print(f"instance: {nb['n_slots']} slots, {nb['n_pairs']} visible pairs")
    print(f"{'kernel':<24}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for key in ("slot_gains_all_ms", "slot_gains_subset_ms",
                "lazy_solve_ms", "stochastic_solve_ms"):
        name = key[:-3]
        ratio = npy[key] / nb[key] if nb[key] > 0 else float("inf")
        print(f"{name:<24}{nb[key]:>12.3f}{npy[key]:>12.3f}{ratio:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
