"""Online problems, algorithms with and without advice, runs and expectations.

A history is the triple ``(initial_state, past_requests, past_answers)``.
Before answering request ``x_i`` an algorithm sees the history and
``problem.observe(x_i)``: the part of the request revealed up front.  For
string guessing nothing is revealed (the character is learned afterwards),
for task systems the whole task is.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterator, NamedTuple, Sequence

import numpy as np

from .config import DEFAULT_SEED, CapExceeded, caps
from .infotheory import FiniteDistribution

History = tuple  # (initial_state, past_requests, past_answers)


def _hide(_request):
    return None


@dataclass(frozen=True)
class OnlineProblem:
    name: str
    initial_states: tuple
    request_alphabet: Callable[[Any, tuple], Sequence]
    answer_alphabet: Callable[[History, Any], Sequence]
    step_cost: Callable[[History, Any, Any], float]
    objective: str = "min"
    observe: Callable[[Any], Any] = _hide
    # True when answer sets or costs depend on past answers
    history_dependent: bool = False

    def __post_init__(self):
        if self.objective not in ("min", "max"):
            raise ValueError("objective must be 'min' or 'max'")

    def validate(self, inp: "InputSequence") -> None:
        if inp.initial_state not in self.initial_states:
            raise ValueError(f"{self.name}: unknown initial state {inp.initial_state!r}")
        for i, x in enumerate(inp.requests):
            if x not in self.request_alphabet(inp.initial_state, inp.requests[:i]):
                raise ValueError(f"{self.name}: request {x!r} at position {i} is not valid")

    def inputs(self, n: int, cap: int | None = None) -> list["InputSequence"]:
        """Every valid input of length n, in lexicographic generation order."""
        cap = caps().max_inputs if cap is None else cap
        out: list[InputSequence] = []

        def rec(s0, prefix):
            if len(prefix) == n:
                out.append(InputSequence(s0, prefix))
                if len(out) > cap:
                    raise CapExceeded("inputs", len(out), cap, "use monte_carlo mode")
                return
            for x in self.request_alphabet(s0, prefix):
                rec(s0, prefix + (x,))

        for s0 in self.initial_states:
            rec(s0, ())
        return out


@dataclass(frozen=True)
class InputSequence:
    initial_state: Hashable
    requests: tuple

    def __init__(self, initial_state, requests=()):
        object.__setattr__(self, "initial_state", initial_state)
        object.__setattr__(self, "requests", tuple(requests))

    @property
    def n(self) -> int:
        return len(self.requests)

    def __len__(self) -> int:
        return len(self.requests)

    def to_json(self, problem: str) -> dict:
        return {"problem": problem, "state": self.initial_state, "requests": list(self.requests)}

    @classmethod
    def from_json(cls, doc: dict) -> "InputSequence":
        return cls(doc["state"], tuple(doc["requests"]))


@dataclass(frozen=True)
class DeterministicAlgorithm:
    """decide(history, visible, advice) -> answer."""

    decide: Callable[[History, Any, str], Any]
    name: str = "alg"
    table: dict | None = field(default=None, compare=False, hash=False)

    @classmethod
    def from_table(cls, table: dict, name: str = "table") -> "DeterministicAlgorithm":
        """Table keyed by (past_requests, visible)."""
        frozen = dict(table)

        def decide(history, visible, advice=""):
            return frozen[(history[1], visible)]

        return cls(decide, name, frozen)

    @classmethod
    def constant(cls, answer, name: str | None = None) -> "DeterministicAlgorithm":
        return cls(lambda h, v, a="": answer, name or f"const[{answer}]")

    def with_advice(self, advice: str, name: str | None = None) -> "DeterministicAlgorithm":
        inner = self.decide
        return DeterministicAlgorithm(lambda h, v, a="": inner(h, v, advice), name or f"{self.name}|{advice}")


@dataclass(frozen=True)
class AdviceAlgorithm:
    advice_length: Callable[[int], int]
    oracle: Callable[[InputSequence], str]
    body: DeterministicAlgorithm
    name: str = "advice-alg"

    def advice_for(self, inp: InputSequence) -> str:
        bits = self.oracle(inp)
        want = self.advice_length(inp.n)
        if len(bits) != want or set(bits) - {"0", "1"}:
            raise ValueError(f"{self.name}: oracle produced {bits!r}, expected exactly {want} bits")
        return bits

    @classmethod
    def with_best_oracle(cls, problem: OnlineProblem, body: DeterministicAlgorithm,
                         bits: Callable[[int], int] | int, name: str = "best-oracle") -> "AdviceAlgorithm":
        """Oracle that writes the advice string minimizing (or maximizing) cost."""
        blen = bits if callable(bits) else (lambda n, b=bits: b)

        def oracle(inp):
            b = blen(inp.n)
            best, best_adv = None, None
            for adv in all_bitstrings(b):
                c = run(problem, body, inp, adv).total
                better = best is None or (c < best if problem.objective == "min" else c > best)
                if better:
                    best, best_adv = c, adv
            return best_adv

        return cls(blen, oracle, body, name)


Algorithm = DeterministicAlgorithm | AdviceAlgorithm


@dataclass(frozen=True)
class RandomizedAlgorithm:
    """A finite mixture of algorithms, or a sampler with an optional exact evaluator.

    ``draw(rng)`` returns one deterministic or advice algorithm; ``exact`` maps
    an input to the expected cost.  Mixtures get both for free.
    """

    support: tuple = ()
    draw_fn: Callable[[np.random.Generator], Algorithm] | None = None
    exact: Callable[[InputSequence], float] | None = None
    name: str = "randomized"

    def __post_init__(self):
        if self.support:
            total = math.fsum(p for _, p in self.support)
            if abs(total - 1.0) > 1e-12 or any(p < 0 for _, p in self.support):
                raise ValueError(f"support probabilities sum to {total!r}")
            lens = {_advice_signature(a) for a, _ in self.support}
            if len(lens) > 1:
                raise ValueError("support members must share the same advice length")
        elif self.draw_fn is None:
            raise ValueError("need a support list or a sampler")

    @classmethod
    def mixture(cls, pairs: Sequence[tuple[Algorithm, float]], name: str = "mixture") -> "RandomizedAlgorithm":
        return cls(support=tuple((a, float(p)) for a, p in pairs), name=name)

    def draw(self, rng: np.random.Generator) -> Algorithm:
        if self.draw_fn is not None:
            return self.draw_fn(rng)
        probs = np.array([p for _, p in self.support])
        i = int(rng.choice(len(self.support), p=probs / probs.sum()))
        return self.support[i][0]


def _advice_signature(alg) -> tuple:
    if isinstance(alg, AdviceAlgorithm):
        return tuple(alg.advice_length(n) for n in range(0, 9))
    return (0,) * 9


class CostTrace(NamedTuple):
    steps: tuple
    answers: tuple
    total: float


def run(problem: OnlineProblem, alg: Algorithm, inp: InputSequence, advice: str | None = None) -> CostTrace:
    """Play alg on inp and return per-step costs, answers and total."""
    if isinstance(alg, AdviceAlgorithm):
        if advice is None:
            advice = alg.advice_for(inp)
        elif len(advice) != alg.advice_length(inp.n):
            raise ValueError(f"advice has {len(advice)} bits, algorithm expects {alg.advice_length(inp.n)}")
        body = alg.body
    else:
        body = alg
        advice = advice or ""
    s0 = inp.initial_state
    reqs: list = []
    answers: list = []
    costs: list = []
    for i, x in enumerate(inp.requests):
        hist = (s0, tuple(reqs), tuple(answers))
        vis = problem.observe(x)
        y = body.decide(hist, vis, advice)
        if y not in problem.answer_alphabet(hist, vis):
            raise ValueError(f"{problem.name}: step {i}: answer {y!r} is not valid")
        c = problem.step_cost(hist, x, y)
        if c < 0:
            raise ValueError(f"{problem.name}: step {i}: negative cost {c!r}")
        costs.append(c)
        reqs.append(x)
        answers.append(y)
    return CostTrace(tuple(costs), tuple(answers), float(np.sum(np.asarray(costs, dtype=float))))


def cost_of(problem: OnlineProblem, alg, inp: InputSequence) -> float:
    """Cost of a deterministic/advice algorithm, or expected cost of a randomized one."""
    if isinstance(alg, RandomizedAlgorithm):
        if alg.support:
            vals = np.array([p * cost_of(problem, a, inp) for a, p in alg.support])
            return float(np.sum(vals))
        if alg.exact is None:
            raise ValueError(f"{alg.name}: no exact evaluator; use monte_carlo")
        return float(alg.exact(inp))
    return run(problem, alg, inp).total


# ------------------------------------------------------------- distributions


@dataclass(frozen=True)
class RoundDistribution:
    """Product distribution over r independently drawn request blocks."""

    initial_state: Hashable
    per_round: tuple  # FiniteDistribution over tuples of requests
    cost_fns: tuple = ()

    def __init__(self, initial_state, per_round, cost_fns=()):
        object.__setattr__(self, "initial_state", initial_state)
        object.__setattr__(self, "per_round", tuple(per_round))
        object.__setattr__(self, "cost_fns", tuple(cost_fns))
        if self.cost_fns and len(self.cost_fns) != len(self.per_round):
            raise ValueError("one cost function per round")

    @property
    def rounds(self) -> int:
        return len(self.per_round)

    def support_size(self) -> int:
        return math.prod(len(d.outcomes) for d in self.per_round)

    def enumerate(self, cap: int | None = None) -> Iterator[tuple[InputSequence, float]]:
        cap = caps().max_inputs if cap is None else cap
        size = self.support_size()
        if size > cap:
            raise CapExceeded("distribution support", size, cap, "use monte_carlo mode")
        for combo in itertools.product(*(list(d.items()) for d in self.per_round)):
            reqs = tuple(x for block, _ in combo for x in _block(block))
            yield InputSequence(self.initial_state, reqs), math.prod(p for _, p in combo)

    def sample_blocks(self, rng: np.random.Generator) -> list:
        return [d.sample(rng) for d in self.per_round]

    def sample(self, rng: np.random.Generator) -> InputSequence:
        reqs = tuple(x for block in self.sample_blocks(rng) for x in _block(block))
        return InputSequence(self.initial_state, reqs)


def _block(block) -> tuple:
    return block if isinstance(block, tuple) else (block,)


def iid_rounds(initial_state, per_round: FiniteDistribution, r: int, cost_fn=None) -> RoundDistribution:
    return RoundDistribution(initial_state, [per_round] * r, [cost_fn] * r if cost_fn else ())


def input_distribution(dist) -> list[tuple[InputSequence, float]]:
    if isinstance(dist, RoundDistribution):
        return list(dist.enumerate())
    if isinstance(dist, FiniteDistribution):
        size = len(dist.outcomes)
        if size > caps().max_inputs:
            raise CapExceeded("distribution support", size, caps().max_inputs, "use monte_carlo mode")
        return list(dist.items())
    return list(dist)


def trial_rng(seed: int, i: int) -> np.random.Generator:
    """Independent stream for trial i, a pure function of (seed, i)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,))))


class Estimate(NamedTuple):
    mean: float
    stderr: float
    mode: str
    trials: int = 0


def expected_cost(problem: OnlineProblem, alg, dist, mode: str = "exact",
                  trials: int = 10_000, seed: int = DEFAULT_SEED) -> Estimate:
    if mode == "exact":
        pairs = input_distribution(dist)
        vals = np.array([p * cost_of(problem, alg, inp) for inp, p in pairs])
        return Estimate(float(np.sum(vals)), 0.0, "exact")
    if mode != "monte_carlo":
        raise ValueError("mode must be 'exact' or 'monte_carlo'")
    samples = np.empty(trials)
    pairs = None if isinstance(dist, RoundDistribution) else input_distribution(dist)
    for i in range(trials):
        rng = trial_rng(seed, i)
        if pairs is None:
            inp = dist.sample(rng)
        else:
            probs = np.array([p for _, p in pairs])
            inp = pairs[int(rng.choice(len(pairs), p=probs / probs.sum()))][0]
        member = alg.draw(rng) if isinstance(alg, RandomizedAlgorithm) else alg
        samples[i] = run(problem, member, inp).total
    mean = float(np.sum(samples) / trials)
    se = float(np.std(samples, ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return Estimate(mean, se, "monte_carlo", trials)


# --------------------------------------------------------------- advice


def all_bitstrings(b: int) -> list[str]:
    if b == 0:
        return [""]
    return [format(i, f"0{b}b") for i in range(2**b)]


def int_to_bits(value: int, width: int) -> str:
    if width == 0:
        if value:
            raise ValueError("no room for a nonzero value")
        return ""
    if not 0 <= value < 2**width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return format(value, f"0{width}b")


def bits_needed(count: int) -> int:
    """ceil(log2 count), the index width for count choices."""
    if count < 1:
        raise ValueError("count must be positive")
    return (count - 1).bit_length()


def split_advice(alg: AdviceAlgorithm, n: int, cap: int | None = None) -> list[DeterministicAlgorithm]:
    """One deterministic algorithm per advice string of length b(n)."""
    b = alg.advice_length(n)
    cap = caps().max_advice_bits if cap is None else cap
    if b > cap:
        raise CapExceeded("advice bits", b, cap)
    return [alg.body.with_advice(s, f"{alg.name}|{s}") for s in all_bitstrings(b)]


# ------------------------------------------------------ self-delimiting


def self_delimiting_encode(n: int) -> str:
    """L ones, a zero, then n on L bits, where L = ceil(log2(n + 1))."""
    if n < 1:
        raise ValueError("n must be positive")
    L = bits_needed(n + 1)
    return "1" * L + "0" + int_to_bits(n, L)


def self_delimiting_decode(bits: str) -> tuple[int, str]:
    """Decode a prefix; returns (n, remaining bits)."""
    L = 0
    while L < len(bits) and bits[L] == "1":
        L += 1
    if L == 0 or L >= len(bits) or bits[L] != "0" or len(bits) < 2 * L + 1:
        raise ValueError(f"malformed self-delimiting prefix in {bits!r}")
    payload = bits[L + 1 : 2 * L + 1]
    n = int(payload, 2)
    if n < 1 or bits_needed(n + 1) != L:
        raise ValueError(f"non-canonical self-delimiting prefix in {bits!r}")
    return n, bits[2 * L + 1 :]


# ------------------------------------------------------ concatenation


class RoundStart(NamedTuple):
    """First request of a block in a marked concatenation."""

    state: Hashable
    request: Any


def repeat_concat(blocks: Sequence[InputSequence], mode: str = "plain") -> InputSequence:
    if not blocks:
        raise ValueError("need at least one block")
    s0 = blocks[0].initial_state
    if any(b.initial_state != s0 for b in blocks):
        raise ValueError("blocks have different initial states")
    if mode == "plain":
        return InputSequence(s0, tuple(x for b in blocks for x in b.requests))
    if mode != "marked":
        raise ValueError("mode must be 'plain' or 'marked'")
    reqs = []
    for b in blocks:
        for j, x in enumerate(b.requests):
            reqs.append(RoundStart(b.initial_state, x) if j == 0 else x)
    return InputSequence(s0, tuple(reqs))


def split_marked(inp: InputSequence) -> list[InputSequence]:
    """Inverse of marked concatenation."""
    out: list[list] = []
    for x in inp.requests:
        if isinstance(x, RoundStart):
            out.append([x.request])
        else:
            if not out:
                raise ValueError("marked sequence must start with a RoundStart")
            out[-1].append(x)
    return [InputSequence(inp.initial_state, tuple(b)) for b in out]


# ------------------------------------------------------ derandomization


def _exact_ratio_cmp(I: int, eps: float, k: int) -> int:
    """Sign of (1 + eps)^k - I computed in exact rationals."""
    lhs = (1 + Fraction(eps)) ** k
    return (lhs > I) - (lhs < I)


def derandomize_min_size(I: int, eps: float) -> int:
    """Smallest integer t with log I / log(1 + eps) < t."""
    if I < 1 or eps <= 0:
        raise ValueError("need I >= 1 and eps > 0")
    ratio = math.log2(I) / math.log2(1 + eps)
    k = round(ratio)
    if abs(ratio - k) < 1e-9:
        # ratio >= k exactly iff (1+eps)^k <= I
        return k + 1 if _exact_ratio_cmp(I, eps, k) <= 0 else k
    return math.floor(ratio) + 1


def derandomize_max_size(I: int, c: float, eps: float) -> int:
    """Smallest integer t with log I * ((c - 1)/eps + 1) < t."""
    if I < 1 or c < 1 or not 0 < eps < 1:
        raise ValueError("need I >= 1, c >= 1, 0 < eps < 1")
    val = math.log2(I) * ((c - 1) / eps + 1)
    k = round(val)
    if abs(val - k) < 1e-9 and I & (I - 1) == 0:
        exact = (I.bit_length() - 1) * ((Fraction(c) - 1) / Fraction(eps) + 1)
        return math.floor(exact) + 1
    return math.floor(val) + 1


@dataclass(frozen=True)
class DerandomizeReport:
    algorithm: AdviceAlgorithm
    members: tuple
    t: int
    attempts: int
    worst_ratio: float
    expectations: dict


def _member_advice_len(alg, n):
    return alg.advice_length(n) if isinstance(alg, AdviceAlgorithm) else 0


def _family_algorithm(problem, members, pick, name) -> AdviceAlgorithm:
    t = len(members)
    w = bits_needed(t)

    def adv_len(n):
        return w + _member_advice_len(members[0], n)

    def oracle(inp):
        i = pick(inp)
        m = members[i]
        tail = m.advice_for(inp) if isinstance(m, AdviceAlgorithm) else ""
        return int_to_bits(i, w) + tail

    def decide(history, visible, advice):
        i = min(int(advice[:w], 2), t - 1) if w else 0
        m = members[i]
        body = m.body if isinstance(m, AdviceAlgorithm) else m
        return body.decide(history, visible, advice[w:])

    return AdviceAlgorithm(adv_len, oracle, DeterministicAlgorithm(decide, name), name)


def _sample_family(problem, rand, inputs, t, seed, max_retries, accept):
    exp = {inp: cost_of(problem, rand, inp) for inp in inputs}
    ratios = []
    for attempt in range(max_retries):
        rng = trial_rng(seed, attempt)
        members = tuple(rand.draw(rng) for _ in range(t))
        costs = {inp: [cost_of(problem, m, inp) for m in members] for inp in inputs}
        ok, ratio = accept(costs, exp)
        ratios.append(ratio)
        if ok:
            return members, costs, exp, attempt + 1, ratio
    raise RuntimeError(f"no good family after {max_retries} attempts; worst-case ratios {ratios}")


def derandomize_min(problem: OnlineProblem, rand: RandomizedAlgorithm, inputs: Sequence[InputSequence],
                    eps: float, seed: int = DEFAULT_SEED, max_retries: int = 50,
                    input_count: int | None = None) -> DerandomizeReport:
    """Sample t algorithms so that on every input the best is within (1 + eps) of E[rand]."""
    if problem.objective != "min":
        raise ValueError("derandomize_min needs a minimization problem")
    inputs = list(inputs)
    t = derandomize_min_size(input_count or len(inputs), eps)

    def accept(costs, exp):
        worst = 0.0
        for inp, cs in costs.items():
            best = min(cs)
            e = exp[inp]
            if e == 0:
                r = 0.0 if best == 0 else math.inf
            else:
                r = best / e
            worst = max(worst, r)
        return worst <= 1 + eps + 1e-12, worst

    members, costs, exp, attempts, worst = _sample_family(problem, rand, inputs, t, seed, max_retries, accept)

    def pick(inp):
        cs = costs.get(inp)
        if cs is None:
            cs = [cost_of(problem, m, inp) for m in members]
        return int(np.argmin(cs))

    alg = _family_algorithm(problem, members, pick, f"derand-min[{rand.name}]")
    return DerandomizeReport(alg, members, t, attempts, worst, exp)


def derandomize_max(problem: OnlineProblem, rand: RandomizedAlgorithm, inputs: Sequence[InputSequence],
                    c: float, eps: float, opt: Callable[[InputSequence], float],
                    seed: int = DEFAULT_SEED, max_retries: int = 50,
                    input_count: int | None = None) -> DerandomizeReport:
    """Maximization analogue; the best sampled profit is at least (1 - eps) E[rand]."""
    if problem.objective != "max":
        raise ValueError("derandomize_max needs a maximization problem")
    inputs = list(inputs)
    for inp in inputs:
        e = cost_of(problem, rand, inp)
        if opt(inp) > c * e + 1e-12:
            raise ValueError(f"strict ratio {c} violated on input {inp.requests!r}")
    t = derandomize_max_size(input_count or len(inputs), c, eps)

    def accept(costs, exp):
        worst = math.inf
        for inp, cs in costs.items():
            e = exp[inp]
            r = math.inf if e == 0 else max(cs) / e
            worst = min(worst, r)
        return worst >= 1 - eps - 1e-12, worst

    members, costs, exp, attempts, worst = _sample_family(problem, rand, inputs, t, seed, max_retries, accept)

    def pick(inp):
        cs = costs.get(inp)
        if cs is None:
            cs = [cost_of(problem, m, inp) for m in members]
        return int(np.argmax(cs))

    alg = _family_algorithm(problem, members, pick, f"derand-max[{rand.name}]")
    return DerandomizeReport(alg, members, t, attempts, worst, exp)
