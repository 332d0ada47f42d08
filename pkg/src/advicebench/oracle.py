"""Brute-force ground truth for tiny instances.

``best_advice_value`` computes the optimal expected cost of a b-bit advice
algorithm against an input distribution, which equals the best expected
pointwise minimum over 2^b deterministic algorithms.  The exact mode is a
dynamic program over the request tree: an algorithm's choice at one history
never constrains its choice at another, so the 2^b tables can be chosen node
by node.  The literal subset search is kept as an independent route for
cross-checks on small inputs.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterator, Sequence

import numpy as np

from . import _kernels
from .config import CapExceeded, caps
from .core import (
    DeterministicAlgorithm,
    InputSequence,
    OnlineProblem,
    input_distribution,
    run,
)
from .infotheory import (
    antisg_cost_floor,
    bsg_cost_floor,
    direct_product_bound,
    K_inv_right,
    pinsker_round_floor,
    sg_cost_floor,
    techlemma_bound,
)

KEY_DIGITS = 12

# ------------------------------------------------------------ enumeration


def decision_points(problem: OnlineProblem, s0, n: int) -> list[tuple[tuple, Any]]:
    """(past_requests, visible) pairs an algorithm can face, shortest prefixes first."""
    pts = []
    layer = [()]
    for depth in range(n):
        nxt = []
        for prefix in layer:
            reqs = problem.request_alphabet(s0, prefix)
            seen = []
            for x in reqs:
                v = problem.observe(x)
                if v not in seen:
                    seen.append(v)
                    pts.append((prefix, v))
            if depth < n - 1:
                nxt.extend(prefix + (x,) for x in reqs)
        layer = nxt
    return pts


def count_algorithms(problem: OnlineProblem, s0, n: int) -> int:
    if problem.history_dependent:
        return sum(1 for _ in _enumerate_tables(problem, s0, n, math.inf))
    return math.prod(len(problem.answer_alphabet((s0, p, ()), v)) for p, v in decision_points(problem, s0, n))


def _answers_along(table: dict, problem: OnlineProblem, s0, prefix: tuple) -> tuple:
    out = []
    for i in range(len(prefix)):
        out.append(table[(prefix[:i], problem.observe(prefix[i]))])
    return tuple(out)


def _enumerate_tables(problem: OnlineProblem, s0, n: int, cap) -> Iterator[dict]:
    pts = decision_points(problem, s0, n)
    table: dict = {}
    count = [0]

    def rec(i):
        if i == len(pts):
            count[0] += 1
            if count[0] > cap:
                raise CapExceeded("deterministic algorithms", count[0], cap)
            yield dict(table)
            return
        prefix, v = pts[i]
        past_answers = _answers_along(table, problem, s0, prefix) if problem.history_dependent else ()
        for a in problem.answer_alphabet((s0, prefix, past_answers), v):
            table[(prefix, v)] = a
            yield from rec(i + 1)
        table.pop((prefix, v), None)

    yield from rec(0)


def enumerate_algorithms(problem: OnlineProblem, n: int, s0=None, cap: int | None = None) -> Iterator[DeterministicAlgorithm]:
    """Every deterministic algorithm for inputs of length n, as decision tables."""
    cap = caps().max_algorithms if cap is None else cap
    s0 = problem.initial_states[0] if s0 is None else s0
    if not problem.history_dependent:
        total = count_algorithms(problem, s0, n)
        if total > cap:
            raise CapExceeded("deterministic algorithms", total, cap)
    for i, t in enumerate(_enumerate_tables(problem, s0, n, cap)):
        yield DeterministicAlgorithm.from_table(t, f"table#{i}")


# ------------------------------------------------------------- best advice


@dataclass
class AdviceValue:
    value: float
    witness: list = field(default_factory=list)  # DeterministicAlgorithm tables
    mode: str = "exact"
    heuristic: bool = False

    def as_dict(self) -> dict:
        return {"value": self.value, "mode": self.mode, "heuristic": self.heuristic, "k": len(self.witness)}


class _Trie:
    __slots__ = ("children", "prob", "mass")

    def __init__(self):
        self.children: dict = {}
        self.prob = 0.0  # probability of the input ending here
        self.mass = 0.0  # probability of the subtree


def _build_trie(pairs, n) -> _Trie:
    root = _Trie()
    for inp, p in pairs:
        if p == 0:
            continue
        if inp.n != n:
            raise ValueError("all inputs must have the same length")
        node = root
        node.mass += p
        for x in inp.requests:
            node = node.children.setdefault(x, _Trie())
            node.mass += p
        node.prob += p
    return root


def _single_state(pairs) -> Any:
    states = {inp.initial_state for inp, p in pairs if p > 0}
    if len(states) != 1:
        raise ValueError("the distribution must use a single initial state")
    return states.pop()


def _rk(v: float) -> float:
    return round(v, KEY_DIGITS)


def _assignments(problem, s0, prefix, v, states):
    """Answer tuples for the algorithms, canonical within groups of equal states."""
    groups: list[list[int]] = []
    for i, st in enumerate(states):
        if groups and states[groups[-1][0]] == st:
            groups[-1].append(i)
        else:
            groups.append([i])
    per_group = []
    for g in groups:
        ans = problem.answer_alphabet((s0, prefix, states[g[0]][1]), v)
        per_group.append(list(itertools.combinations_with_replacement(ans, len(g))))
    for combo in itertools.product(*per_group):
        out = [None] * len(states)
        for g, choice in zip(groups, combo):
            for i, a in zip(g, choice):
                out[i] = a
        yield tuple(out)


def best_advice_value(problem: OnlineProblem, dist, b: int, mode: str = "exact",
                      cap: int | None = None) -> AdviceValue:
    """Best expected cost achievable with b advice bits.

    mode "exact": request-tree dynamic program (no size limit beyond time).
    mode "enumerate": literal minimum over subsets of enumerated algorithms.
    mode "greedy": add the best marginal algorithm 2^b times; an upper bound.
    """
    if problem.objective != "min":
        raise ValueError("only minimization problems are supported")
    if b > caps().max_advice_bits:
        raise CapExceeded("advice bits", b, caps().max_advice_bits)
    pairs = input_distribution(dist)
    if mode == "exact":
        return _best_advice_dp(problem, pairs, 2**b)
    if mode in ("enumerate", "greedy"):
        return _best_advice_subsets(problem, pairs, 2**b, mode, cap)
    raise ValueError("mode must be 'exact', 'enumerate' or 'greedy'")


def _best_advice_dp(problem: OnlineProblem, pairs, k: int) -> AdviceValue:
    s0 = _single_state(pairs)
    n = next(inp.n for inp, p in pairs if p > 0)
    root = _build_trie(pairs, n)
    hist = problem.history_dependent

    def canon(states):
        # subtract the smallest offset; order algorithms by state
        m = min(s[0] for s in states)
        return m, tuple(sorted((_rk(s[0] - m), s[1]) for s in states))

    memo: dict = {}

    def value(node: _Trie, prefix: tuple, states: tuple) -> tuple[float, dict]:
        key = (prefix, states)
        hit = memo.get(key)
        if hit is not None:
            return hit
        total = node.prob * min(s[0] for s in states)
        choices = {}
        by_vis: dict = {}
        for x in node.children:
            by_vis.setdefault(problem.observe(x), []).append(x)
        for v, xs in by_vis.items():
            best, best_a = math.inf, None
            for a in _assignments(problem, s0, prefix, v, states):
                acc = 0.0
                for x in xs:
                    child = node.children[x]
                    new = []
                    for (off, past), y in zip(states, a):
                        h = (s0, prefix, past)
                        c = problem.step_cost(h, x, y)
                        new.append((off + c, past + (y,) if hist else ()))
                    m, cs = canon(new)
                    acc += child.mass * m + value(child, prefix + (x,), cs)[0]
                    if acc >= best:
                        break
                if acc < best:
                    best, best_a = acc, a
            total += best
            choices[v] = best_a
        memo[key] = (total, choices)
        return memo[key]

    start = tuple((0.0, ()) for _ in range(k))
    val = value(root, (), start)[0]

    # rebuild k explicit tables top-down
    tables = [dict() for _ in range(k)]

    def rebuild(node, prefix, actual):
        m, cs = canon(actual)
        order = sorted(range(k), key=lambda i: (_rk(actual[i][0] - m), actual[i][1]))
        _, choices = memo[(prefix, cs)]
        by_vis: dict = {}
        for x in node.children:
            by_vis.setdefault(problem.observe(x), []).append(x)
        for v, xs in by_vis.items():
            a_canon = choices[v]
            a = [None] * k
            for pos, alg in enumerate(order):
                a[alg] = a_canon[pos]
            for alg in range(k):
                tables[alg][(prefix, v)] = a[alg]
            for x in xs:
                new = []
                for (off, past), y in zip(actual, a):
                    c = problem.step_cost((s0, prefix, past), x, y)
                    new.append((off + c, past + (y,) if hist else ()))
                rebuild(node.children[x], prefix + (x,), tuple(new))

    rebuild(root, (), start)
    witness = [_complete_table(problem, s0, n, t, f"witness#{i}") for i, t in enumerate(tables)]
    return AdviceValue(float(val), witness, "exact")


def _complete_table(problem, s0, n, table, name) -> DeterministicAlgorithm:
    """Fill decision points outside the support with the first valid answer."""
    full = dict(table)

    def decide(history, visible, advice=""):
        key = (history[1], visible)
        if key not in full:
            full[key] = problem.answer_alphabet(history, visible)[0]
        return full[key]

    return DeterministicAlgorithm(decide, name, full)


def cost_matrix(problem: OnlineProblem, algs: Sequence, pairs) -> np.ndarray:
    """Rows: algorithms; columns: supported inputs; entries weighted by probability."""
    sup = [(inp, p) for inp, p in pairs if p > 0]
    C = np.empty((len(algs), len(sup)))
    for i, a in enumerate(algs):
        for j, (inp, p) in enumerate(sup):
            C[i, j] = p * run(problem, a, inp).total
    return C


def _best_advice_subsets(problem, pairs, k, mode, cap) -> AdviceValue:
    s0 = _single_state(pairs)
    n = next(inp.n for inp, p in pairs if p > 0)
    algs = list(enumerate_algorithms(problem, n, s0, cap))
    C = cost_matrix(problem, algs, pairs)
    k = min(k, len(algs))
    if mode == "greedy":
        chosen: list[int] = []
        cur = np.full(C.shape[1], np.inf)
        for _ in range(k):
            vals = np.minimum(C, cur).sum(axis=1)
            if chosen:
                vals[chosen] = np.inf
            j = int(np.argmin(vals))
            chosen.append(j)
            cur = np.minimum(cur, C[j])
        return AdviceValue(float(cur.sum()), [algs[j] for j in chosen], "greedy", heuristic=True)
    n_sub = math.comb(len(algs), k)
    limit = caps().max_subsets
    if n_sub > limit:
        raise CapExceeded("algorithm subsets", n_sub, limit, "use mode='exact' or 'greedy'")
    val, idx = _kernels.best_subset(C, k)
    return AdviceValue(float(val), [algs[int(j)] for j in idx], "enumerate")


def pointwise_optimum(problem: OnlineProblem, dist) -> float:
    """E[OPT]: the value of unlimited advice."""
    pairs = input_distribution(dist)
    total = []
    for inp, p in pairs:
        if p == 0:
            continue
        total.append(p * _opt_single(problem, inp))
    return float(np.sum(np.array(total)))


def _opt_single(problem: OnlineProblem, inp: InputSequence) -> float:
    s0 = inp.initial_state

    @lru_cache(maxsize=None)
    def rec(i, past):
        if i == inp.n:
            return 0.0
        prefix = inp.requests[:i]
        x = inp.requests[i]
        h = (s0, prefix, past)
        best = math.inf
        for y in problem.answer_alphabet(h, problem.observe(x)):
            c = problem.step_cost(h, x, y)
            best = min(best, c + rec(i + 1, past + (y,) if problem.history_dependent else ()))
        return best

    return rec(0, ())


# ----------------------------------------------------------- certification


def cost_floor(formula_id: str, params: dict, b: float) -> float:
    """Expected-cost lower bound implied by a formula at b advice bits."""
    p = params
    if formula_id == "sg_lower":
        return sg_cost_floor(p["q"], p["n"], b)
    if formula_id == "antisg_lower":
        return antisg_cost_floor(p["q"], p["n"], b)
    if formula_id == "bsg_lower":
        return bsg_cost_floor(p["s"], p["t"], p["n"], b)
    if formula_id == "dp_pinsker":
        f = pinsker_round_floor(p["t"], p["M"])
        return direct_product_bound(f, p["r"], b).value
    if formula_id == "dp_klem":
        q, L = p["q"], p["L"]
        return direct_product_bound(lambda d: L * (1 - K_inv_right(1 / q, d / L)), p["r"], b).value
    if formula_id == "techlemma":
        return techlemma_bound(p["t"], p["M"], p["r"], b).value
    raise ValueError(f"unknown formula {formula_id!r}")


CERTIFIABLE = ("sg_lower", "antisg_lower", "bsg_lower", "dp_pinsker", "dp_klem", "techlemma")


@dataclass
class CertRow:
    b: int
    formula: str
    bound: float
    brute_force: float
    slack: float
    sound: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class CertReport:
    rows: list

    @property
    def sound(self) -> bool:
        return all(r.sound for r in self.rows)

    def as_dict(self) -> dict:
        return {"sound": self.sound, "rows": [r.as_dict() for r in self.rows]}


def certify_bound(formula_id: str, params: dict, problem: OnlineProblem, dist,
                  b_grid: Sequence[int], mode: str = "exact", tol: float = 1e-9) -> CertReport:
    """Check best_advice_value >= the formula's cost floor at every b."""
    rows = []
    for b in b_grid:
        floor = cost_floor(formula_id, params, b)
        brute = best_advice_value(problem, dist, b, mode).value
        rows.append(CertRow(b, formula_id, floor, brute, brute - floor, brute >= floor - tol))
    return CertReport(rows)


# ------------------------------------------------------------------ paging


def belady(k: int, sigma: Sequence, initial: Sequence | None = None) -> int:
    """Faults of farthest-in-future eviction."""
    cache = set(initial or [])
    if len(cache) > k:
        raise ValueError("initial cache larger than k")
    faults = 0
    for i, p in enumerate(sigma):
        if p in cache:
            continue
        faults += 1
        if len(cache) >= k:
            def next_use(page):
                for j in range(i + 1, len(sigma)):
                    if sigma[j] == page:
                        return j
                return math.inf

            victim = max(sorted(cache), key=next_use)
            cache.remove(victim)
        cache.add(p)
    return faults


def paging_exhaustive(k: int, sigma: Sequence, initial: Sequence | None = None) -> int:
    """Fewest faults over every demand-paging eviction sequence."""
    sig = tuple(sigma)

    @lru_cache(maxsize=None)
    def rec(i, cache):
        if i == len(sig):
            return 0
        p = sig[i]
        if p in cache:
            return rec(i + 1, cache)
        if len(cache) < k:
            return 1 + rec(i + 1, cache | {p})
        return 1 + min(rec(i + 1, (cache - {v}) | {p}) for v in cache)

    return rec(0, frozenset(initial or ()))
