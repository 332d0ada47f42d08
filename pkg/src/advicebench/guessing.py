"""String guessing variants, the HSGG game and anti-covering codes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .config import DEFAULT_SEED, CapExceeded, caps
from .core import (
    AdviceAlgorithm,
    DeterministicAlgorithm,
    InputSequence,
    OnlineProblem,
    RoundDistribution,
    bits_needed,
    iid_rounds,
    int_to_bits,
    run,
)
from .games import CostMatrix, bsg_matrix, identity_matrix, rmg_problem, sgkh_matrix
from .infotheory import K, FiniteDistribution

# ----------------------------------------------------------- string guessing


def variant_matrix(variant: str, q: int = 2, s: float = 1, t: float = 1) -> CostMatrix:
    if variant == "sgkh":
        return sgkh_matrix(q)
    if variant == "anti":
        return identity_matrix(q)
    if variant == "bsg":
        if not 0 < s <= t:
            raise ValueError("bsg needs 0 < s <= t")
        return bsg_matrix(s, t)
    raise ValueError(f"unknown variant {variant!r}")


def guessing_problem(variant: str, q: int = 2, s: float = 1, t: float = 1) -> OnlineProblem:
    name = f"{variant}{q}" if variant != "bsg" else f"bsg({s},{t})"
    return rmg_problem(variant_matrix(variant, q, s, t), name)


@dataclass(frozen=True)
class GuessInstance:
    q: int
    x: tuple
    variant: str = "sgkh"
    s: float = 1
    t: float = 1

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be at least 2")
        if any(not 0 <= c < self.q for c in self.x):
            raise ValueError("character out of range")
        if self.variant == "bsg" and (self.q != 2 or not 0 < self.s <= self.t):
            raise ValueError("bsg needs q = 2 and 0 < s <= t")

    @property
    def n(self) -> int:
        return len(self.x)

    def problem(self) -> OnlineProblem:
        return guessing_problem(self.variant, self.q, self.s, self.t)

    def input(self) -> InputSequence:
        return InputSequence("s", self.x)


def sg_simulate(alg, instance: GuessInstance, advice: str | None = None) -> float:
    return run(instance.problem(), alg, instance.input(), advice).total


def replay_alg(x: Sequence[int]) -> DeterministicAlgorithm:
    """Knows x in advance and answers x_i; zero cost for SGKH."""
    xs = tuple(x)
    return DeterministicAlgorithm(lambda h, v, a="": xs[len(h[1])], "replay")


def uniform_hard_distribution(q: int, n: int, variant: str = "sgkh") -> RoundDistribution:
    A = variant_matrix(variant, q)
    return iid_rounds("s", FiniteDistribution.uniform(range(q)), n, lambda y, x: A.rows[x][y])


# ------------------------------------------------------- anti-covering codes


def all_words(q: int, n: int) -> np.ndarray:
    """Every string in [q]^n, one per row, in lexicographic order."""
    size = q**n
    if size > caps().max_verify:
        raise CapExceeded("words to verify", size, caps().max_verify)
    idx = np.arange(size, dtype=np.int64)
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] // powers[None, :]) % q).astype(np.uint8)


def anticover_size(q: int, n: int, alpha: float) -> int:
    """Number of random codewords drawn: floor((n+1) 2^{K n} ln(q) n + 1)."""
    return math.floor((n + 1) * 2.0 ** (K(1 / q, alpha) * n) * math.log(q) * n + 1)


def anticover_radius(n: int, alpha: float) -> int:
    return math.ceil((1 - alpha) * n - 1e-9)


def effective_alpha(n: int, alpha: float) -> float:
    """floor(alpha n)/n: the mistake budget the integer radius actually allows.

    The sampling estimate uses Pr[Bin(n, 1-1/q) >= (1-alpha) n], whose
    2^{-K n}/(n+1) lower bound needs (1-alpha) n to be an integer.
    """
    return (n - anticover_radius(n, alpha)) / n


@dataclass(frozen=True)
class AntiCoveringCode:
    q: int
    n: int
    radius: int
    codewords: np.ndarray  # uint8, rows sorted lexicographically
    sampled: int = 0
    attempts: int = 1

    def __len__(self) -> int:
        return int(self.codewords.shape[0])

    def verify(self) -> bool:
        """Exhaustive: every word has a codeword at distance >= radius."""
        words = all_words(self.q, self.n)
        return bool(np.all(_kernels.anticover_counts(words, self.codewords, self.radius) > 0))

    def advice_bits(self) -> int:
        return bits_needed(len(self))

    def to_text(self) -> str:
        return "\n".join("".join(str(int(c)) for c in row) for row in self.codewords) + "\n"

    @classmethod
    def from_text(cls, text: str, q: int, radius: int) -> "AntiCoveringCode":
        rows = sorted(line.strip() for line in text.splitlines() if line.strip())
        arr = np.array([[int(ch, q) for ch in r] for r in rows], dtype=np.uint8)
        return cls(q, arr.shape[1], radius, arr)


def _lex_unique(rows: np.ndarray) -> np.ndarray:
    return np.unique(rows, axis=0)


def build_anticover(q: int, n: int, alpha: float, seed: int = DEFAULT_SEED,
                    retry_budget: int = 20, prune: bool = True) -> AntiCoveringCode:
    """Random anti-covering code of radius ceil((1 - alpha) n), verified exhaustively.

    The sample size is computed at the effective alpha (see effective_alpha).

    With ``prune`` the verified sample is thinned greedily to an irredundant
    subcode and verified again.
    """
    if not 0 < alpha < 1 / q:
        raise ValueError("need 0 < alpha < 1/q")
    r = anticover_radius(n, alpha)
    m = max(anticover_size(q, n, alpha), anticover_size(q, n, effective_alpha(n, alpha)))
    words = all_words(q, n)
    for attempt in range(retry_budget):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(attempt,)))
        code = _lex_unique(rng.integers(0, q, size=(m, n), dtype=np.uint8))
        if not np.all(_kernels.anticover_counts(words, code, r) > 0):
            continue
        if prune:
            keep = _kernels.anticover_prune(words, code, r, np.arange(code.shape[0]))
            code = code[keep]
            if not np.all(_kernels.anticover_counts(words, code, r) > 0):
                raise RuntimeError("pruned code lost coverage")
        return AntiCoveringCode(q, n, r, code, m, attempt + 1)
    raise RuntimeError(f"no anti-covering code after {retry_budget} attempts (m={m}, radius={r})")


def anticover_alg(code: AntiCoveringCode) -> AdviceAlgorithm:
    """Oracle names the first codeword far from x; the body replays it."""
    w = code.advice_bits()
    cw = code.codewords

    def oracle(inp):
        x = np.asarray(inp.requests, dtype=np.uint8)
        dist = (cw != x[None, :]).sum(axis=1)
        hits = np.flatnonzero(dist >= code.radius)
        if hits.size == 0:
            raise ValueError("code does not anti-cover this input")
        return int_to_bits(int(hits[0]), w)

    def decide(history, visible, advice):
        j = int(advice, 2) if w else 0
        return int(cw[min(j, len(cw) - 1), len(history[1])])

    return AdviceAlgorithm(lambda n: w, oracle, DeterministicAlgorithm(decide, "anticover-replay"), "anticover")


# ------------------------------------------------------------------- HSGG


@dataclass(frozen=True)
class HSGGInstance:
    """Rounds reveal a k/2-subset A_i of 1..k; x_i in A_i is learned after answering."""

    k: int
    A: tuple
    x: tuple

    def __init__(self, k: int, A: Sequence[Sequence[int]], x: Sequence[int]):
        A = tuple(tuple(sorted(a)) for a in A)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "x", tuple(x))
        if k % 2 or k < 2:
            raise ValueError("k must be even and positive")
        if len(A) != len(self.x):
            raise ValueError("one subset per character")
        if k > len(self.x):
            raise ValueError("need k <= n")
        for a, c in zip(A, self.x):
            if len(set(a)) != k // 2 or any(not 1 <= v <= k for v in a):
                raise ValueError(f"subset {a} is not a k/2-subset of 1..{k}")
            if c not in a:
                raise ValueError(f"character {c} is not in its subset {a}")

    @property
    def n(self) -> int:
        return len(self.x)

    def input(self) -> InputSequence:
        return InputSequence("s", tuple(zip(self.A, self.x)))


def hsgg_violation(y: int, history, available: Sequence[int]) -> str | None:
    """Reason y is infeasible now, or None when feasible."""
    past = history[1]
    for t, yt in enumerate(history[2]):
        if yt == y and past[t][1] not in available:
            return f"answer {y} was used in round {t} where the character {past[t][1]} is outside {tuple(available)}"
    return None


def hsgg_feasible(y: int, history, available: Sequence[int]) -> bool:
    return hsgg_violation(y, history, available) is None


def hsgg_problem(n: int, k: int) -> OnlineProblem:
    subsets = tuple(itertools.combinations(range(1, k + 1), k // 2))
    requests = tuple((a, c) for a in subsets for c in a)
    answers = tuple(range(1, n + 1))

    def answer_alphabet(history, available):
        return tuple(y for y in answers if hsgg_feasible(y, history, available))

    def step_cost(history, request, y):
        return 0 if y in history[2] else 1

    return OnlineProblem(
        name=f"hsgg(n={n},k={k})",
        initial_states=("s",),
        request_alphabet=lambda s, past: requests,
        answer_alphabet=answer_alphabet,
        step_cost=step_cost,
        observe=lambda req: req[0],
        history_dependent=True,
    )


def hsgg_simulate(alg, instance: HSGGInstance, advice: str | None = None):
    """Run alg with feasibility enforced; returns (cost, answers)."""
    prob = hsgg_problem(instance.n, instance.k)
    inp = instance.input()
    if isinstance(alg, AdviceAlgorithm) and advice is None:
        advice = alg.advice_for(inp)
    body = alg.body if isinstance(alg, AdviceAlgorithm) else alg
    answers: list = []
    for i, req in enumerate(inp.requests):
        hist = ("s", inp.requests[:i], tuple(answers))
        y = body.decide(hist, req[0], advice or "")
        if not 1 <= y <= instance.n:
            raise ValueError(f"round {i}: answer {y} outside 1..{instance.n}")
        why = hsgg_violation(y, hist, req[0])
        if why:
            raise ValueError(f"round {i}: infeasible, {why}")
        answers.append(y)
    return hsgg_cost(answers), tuple(answers)


def hsgg_check_output(y: Sequence[int], instance: HSGGInstance) -> None:
    reqs = instance.input().requests
    for i, yi in enumerate(y):
        why = hsgg_violation(yi, ("s", reqs[:i], tuple(y[:i])), instance.A[i])
        if why:
            raise ValueError(f"round {i}: infeasible, {why}")


def hsgg_cost(y: Sequence[int]) -> int:
    return len(set(y))


def pair_cost(y: Sequence[int], instance: HSGGInstance) -> int:
    """Rounds whose (answer, character) pair has not appeared before."""
    return len(set(zip(y, instance.x)))


def replay_x_alg(k: int) -> AdviceAlgorithm:
    """Oracle writes x; answering y_i = x_i is feasible and costs at most k."""
    w = bits_needed(k)

    def oracle(inp):
        return "".join(int_to_bits(c - 1, w) for _, c in inp.requests)

    def decide(history, visible, advice):
        i = len(history[1])
        return int(advice[i * w : (i + 1) * w], 2) + 1

    return AdviceAlgorithm(lambda n: n * w, oracle, DeterministicAlgorithm(decide, "replay-x"), "replay-x")


def first_fit_alg() -> DeterministicAlgorithm:
    """Smallest feasible answer, without advice."""

    def decide(history, available, advice=""):
        y = 1
        while not hsgg_feasible(y, history, available):
            y += 1
        return y

    return DeterministicAlgorithm(decide, "first-fit")


def hsgg_opt(instance: HSGGInstance) -> tuple[int, tuple]:
    """Minimum cost over all feasible outputs by depth-first search."""
    n = instance.n
    reqs = instance.input().requests
    best = [instance.k + 1, None]
    # known upper bound: replay x
    best[0], best[1] = hsgg_cost(instance.x), instance.x

    def rec(i, ys, used):
        if used >= best[0]:
            return
        if i == n:
            best[0], best[1] = used, tuple(ys)
            return
        hist = ("s", reqs[:i], tuple(ys))
        # reuse an existing label first, then one fresh label (labels are symmetric)
        for y in range(1, used + 1):
            if hsgg_feasible(y, hist, instance.A[i]):
                ys.append(y)
                rec(i + 1, ys, used)
                ys.pop()
        ys.append(used + 1)
        rec(i + 1, ys, used + 1)
        ys.pop()

    rec(0, [], 0)
    return best[0], best[1]


def random_hsgg_instance(n: int, k: int, rng: np.random.Generator) -> HSGGInstance:
    A, x = [], []
    for _ in range(n):
        a = sorted(rng.choice(np.arange(1, k + 1), size=k // 2, replace=False).tolist())
        A.append(a)
        x.append(int(rng.choice(a)))
    return HSGGInstance(k, A, x)


def hsgg_hard_distribution(n: int, k: int) -> RoundDistribution:
    """Each round: uniform k/2-subset, then a uniform character from it."""
    if k % 2 or k > n:
        raise ValueError("need k even and k <= n")
    subsets = list(itertools.combinations(range(1, k + 1), k // 2))
    w = 1.0 / (len(subsets) * (k // 2))
    # each outcome is a one-request block
    per = FiniteDistribution([(((a, c),), w) for a in subsets for c in a])
    return iid_rounds("s", per, n)
