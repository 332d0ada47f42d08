"""Hot loops with a numba path and a pure-numpy path.

The numba path is used when numba imports and ADVICEBENCH_NUMBA is not set
to 0/false/off.  Both paths are always importable under explicit names
(``*_numba`` / ``*_numpy``) so tests and the benchmark can compare them.
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_ENV = "ADVICEBENCH_NUMBA"

try:  # pragma: no cover - depends on environment
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _flag_enabled() -> bool:
    return os.environ.get(NUMBA_ENV, "1").strip().lower() not in {"0", "false", "off", "no"}


USE_NUMBA = HAVE_NUMBA and _flag_enabled()


# ---------------------------------------------------------------- hamming


def _anticover_counts_py(words, code, r):
    w, n = words.shape
    m = code.shape[0]
    out = np.zeros(w, dtype=np.int64)
    for i in range(w):
        c = 0
        for j in range(m):
            d = 0
            for p in range(n):
                if words[i, p] != code[j, p]:
                    d += 1
            if d >= r:
                c += 1
        out[i] = c
    return out


def _anticover_prune_py(words, code, r, order):
    counts = _anticover_counts_py(words, code, r)
    w, n = words.shape
    keep = np.ones(code.shape[0], dtype=np.bool_)
    hit = np.zeros(w, dtype=np.bool_)
    for jj in range(order.shape[0]):
        j = order[jj]
        removable = True
        for i in range(w):
            d = 0
            for p in range(n):
                if words[i, p] != code[j, p]:
                    d += 1
            hit[i] = d >= r
            if hit[i] and counts[i] < 2:
                removable = False
        if removable:
            keep[j] = False
            for i in range(w):
                if hit[i]:
                    counts[i] -= 1
    return keep


def anticover_counts_numpy(words: np.ndarray, code: np.ndarray, r: int, chunk: int = 256) -> np.ndarray:
    """For each word, the number of codewords at Hamming distance >= r."""
    out = np.zeros(words.shape[0], dtype=np.int64)
    for lo in range(0, code.shape[0], chunk):
        block = code[lo : lo + chunk]
        dist = (words[:, None, :] != block[None, :, :]).sum(axis=2)
        out += (dist >= r).sum(axis=1)
    return out


def anticover_prune_numpy(words: np.ndarray, code: np.ndarray, r: int, order: np.ndarray) -> np.ndarray:
    """Greedy irredundant subset: drop codewords, in ``order``, whose words stay covered."""
    counts = anticover_counts_numpy(words, code, r)
    keep = np.ones(code.shape[0], dtype=bool)
    for j in order:
        hit = (words != code[j]).sum(axis=1) >= r
        if np.all(counts[hit] >= 2):
            keep[j] = False
            counts[hit] -= 1
    return keep


# ---------------------------------------------------------------- subsets


def _best_subset_py(cost, k, suffix_min):
    a, x = cost.shape
    best = np.inf
    best_idx = np.zeros(k, dtype=np.int64)
    idx = np.zeros(k, dtype=np.int64)
    cur = np.empty((k + 1, x))
    for t in range(x):
        cur[0, t] = np.inf
    depth = 0
    idx[0] = 0
    while True:
        if idx[depth] > a - (k - depth):
            if depth == 0:
                break
            depth -= 1
            idx[depth] += 1
            continue
        i = idx[depth]
        val = 0.0
        bound = 0.0
        for t in range(x):
            v = min(cur[depth, t], cost[i, t])
            cur[depth + 1, t] = v
            val += v
            if i + 1 < a:
                bound += min(v, suffix_min[i + 1, t])
            else:
                bound += v
        if depth == k - 1:
            if val < best:
                best = val
                for d in range(k):
                    best_idx[d] = idx[d]
            idx[depth] += 1
        elif bound >= best:
            idx[depth] += 1
        else:
            depth += 1
            idx[depth] = i + 1
    return best, best_idx


def _suffix_min(cost: np.ndarray) -> np.ndarray:
    return np.minimum.accumulate(cost[::-1], axis=0)[::-1].copy()


def best_subset_numpy(cost: np.ndarray, k: int) -> tuple[float, np.ndarray]:
    """Min over k-subsets S of rows of sum_x min_{i in S} cost[i, x].

    ``cost`` rows should already be probability weighted.  Lexicographic
    enumeration with a suffix-minimum bound; the last level is vectorized.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    a, x = cost.shape
    if not 1 <= k <= a:
        raise ValueError("need 1 <= k <= number of rows")
    sm = _suffix_min(cost)
    best = [np.inf, None]

    def rec(start, depth, cur, chosen):
        if depth == k - 1:
            rows = cost[start:]
            vals = np.minimum(rows, cur).sum(axis=1)
            j = int(np.argmin(vals))
            if vals[j] < best[0]:
                best[0] = float(vals[j])
                best[1] = chosen + [start + j]
            return
        for i in range(start, a - (k - depth) + 1):
            nxt = np.minimum(cur, cost[i])
            tail = sm[i + 1] if i + 1 < a else nxt
            if np.minimum(nxt, tail).sum() >= best[0]:
                continue
            rec(i + 1, depth + 1, nxt, chosen + [i])

    rec(0, 0, np.full(x, np.inf), [])
    return best[0], np.asarray(best[1], dtype=np.int64)


# ---------------------------------------------------------------- task DP


def _ts_dp_py(dist, costs, s0):
    n, m = costs.shape
    cur = np.empty(m)
    for s in range(m):
        cur[s] = dist[s0, s] + costs[0, s] if n > 0 else 0.0
    if n == 0:
        return 0.0
    nxt = np.empty(m)
    for i in range(1, n):
        for s in range(m):
            best = np.inf
            for p in range(m):
                v = cur[p] + dist[p, s]
                if v < best:
                    best = v
            nxt[s] = best + costs[i, s]
        for s in range(m):
            cur[s] = nxt[s]
    out = np.inf
    for s in range(m):
        if cur[s] < out:
            out = cur[s]
    return out


def ts_dp_numpy(dist: np.ndarray, costs: np.ndarray, s0: int) -> float:
    """Offline optimum of a task sequence: rows of ``costs`` are tasks."""
    if costs.shape[0] == 0:
        return 0.0
    cur = dist[s0] + costs[0]
    for row in costs[1:]:
        cur = (cur[:, None] + dist).min(axis=0) + row
    return float(cur.min())


if HAVE_NUMBA:  # pragma: no branch
    _counts_jit = njit(cache=True)(_anticover_counts_py)

    @njit(cache=True)
    def _prune_jit(words, code, r, order):
        counts = _counts_jit(words, code, r)
        w, n = words.shape
        keep = np.ones(code.shape[0], dtype=np.bool_)
        hit = np.zeros(w, dtype=np.bool_)
        for jj in range(order.shape[0]):
            j = order[jj]
            removable = True
            for i in range(w):
                d = 0
                for p in range(n):
                    if words[i, p] != code[j, p]:
                        d += 1
                hit[i] = d >= r
                if hit[i] and counts[i] < 2:
                    removable = False
            if removable:
                keep[j] = False
                for i in range(w):
                    if hit[i]:
                        counts[i] -= 1
        return keep

    _best_subset_jit = njit(cache=True)(_best_subset_py)
    _ts_dp_jit = njit(cache=True)(_ts_dp_py)

    def anticover_counts_numba(words, code, r):
        return _counts_jit(np.ascontiguousarray(words), np.ascontiguousarray(code), int(r))

    def anticover_prune_numba(words, code, r, order):
        return _prune_jit(
            np.ascontiguousarray(words), np.ascontiguousarray(code), int(r), np.asarray(order, dtype=np.int64)
        )

    def best_subset_numba(cost, k):
        cost = np.ascontiguousarray(cost, dtype=np.float64)
        if not 1 <= k <= cost.shape[0]:
            raise ValueError("need 1 <= k <= number of rows")
        val, idx = _best_subset_jit(cost, int(k), _suffix_min(cost))
        return float(val), idx

    def ts_dp_numba(dist, costs, s0):
        return float(_ts_dp_jit(np.ascontiguousarray(dist, dtype=np.float64),
                                np.ascontiguousarray(costs, dtype=np.float64), int(s0)))
else:  # pragma: no cover
    anticover_counts_numba = anticover_counts_numpy
    anticover_prune_numba = anticover_prune_numpy
    best_subset_numba = best_subset_numpy
    ts_dp_numba = ts_dp_numpy


if USE_NUMBA:
    anticover_counts = anticover_counts_numba
    anticover_prune = anticover_prune_numba
    best_subset = best_subset_numba
    ts_dp = ts_dp_numba
else:
    anticover_counts = anticover_counts_numpy
    anticover_prune = anticover_prune_numpy
    best_subset = best_subset_numpy
    ts_dp = ts_dp_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
