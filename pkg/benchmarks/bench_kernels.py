#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernels on workloads the package runs.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each row checks that both paths return the same answer, then reports the best
wall time of ``--repeat`` runs.  The first numba call (compilation or cache
load) is timed separately.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from advicebench import _kernels as K
from advicebench.guessing import (
    all_words,
    anticover_radius,
    anticover_size,
    effective_alpha,
    guessing_problem,
    uniform_hard_distribution,
)
from advicebench.oracle import cost_matrix, enumerate_algorithms
from advicebench.tasksystems import paging_as_lts


def _best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b):
    if isinstance(a, tuple):
        return abs(a[0] - b[0]) <= 1e-9
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return abs(a - b) <= 1e-9


def workloads(seed: int):
    rng = np.random.default_rng(seed)

    n, alpha = 12, 0.2
    words = all_words(2, n)
    r = anticover_radius(n, alpha)
    m = max(anticover_size(2, n, alpha), anticover_size(2, n, effective_alpha(n, alpha)))
    code = np.unique(rng.integers(0, 2, size=(m, n), dtype=np.uint8), axis=0)
    yield "anticover_counts n=12", lambda f: f(words, code, r), K.anticover_counts_numba, K.anticover_counts_numpy
    order = np.arange(code.shape[0])
    yield "anticover_prune n=12", lambda f: f(words, code, r, order), K.anticover_prune_numba, K.anticover_prune_numpy

    prob = guessing_problem("sgkh", 2)
    pairs = list(uniform_hard_distribution(2, 3).enumerate())
    C = cost_matrix(prob, list(enumerate_algorithms(prob, 3, "s")), pairs)
    yield "best_subset 128x8 k=4", lambda f: f(C, 4), K.best_subset_numba, K.best_subset_numpy

    ts = paging_as_lts(3, 7)
    sigma = rng.integers(0, 7, size=400).tolist()
    costs = ts.cost_matrix(sigma)
    yield "ts_dp 35 states x 400", lambda f: f(ts.dist, costs, 0), K.ts_dp_numba, K.ts_dp_numpy


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    rows = []
    print(f"{'kernel':28s} {'first numba':>12s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, call, fast, slow in workloads(args.seed):
        t0 = time.perf_counter()
        call(fast)
        first = time.perf_counter() - t0
        t_fast, a = _best_of(lambda: call(fast), args.repeat)
        t_slow, b = _best_of(lambda: call(slow), args.repeat)
        if not _same(a, b):
            raise SystemExit(f"{name}: numba and numpy disagree")
        rows.append({"kernel": name, "first_numba_s": first, "numba_s": t_fast, "numpy_s": t_slow,
                     "speedup": t_slow / t_fast})
        print(f"{name:28s} {first:12.4f} {t_fast:10.4f} {t_slow:10.4f} {t_slow / t_fast:8.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
