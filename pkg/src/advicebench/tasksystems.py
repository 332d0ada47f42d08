"""Generalized and lazy task systems.

A task system has states, a transition cost d(s, s') and tasks mapping each
state to a processing cost (possibly infinite).  Serving task t from state s
by moving to s' costs d(s, s') + t(s').  Algorithms answer with the next
state; the whole task is visible before answering.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from . import _kernels
from .config import CapExceeded, caps
from .core import (
    DeterministicAlgorithm,
    InputSequence,
    OnlineProblem,
    RandomizedAlgorithm,
    run,
)

INF = math.inf


@dataclass(frozen=True)
class CostProfile:
    max_cost: float
    min_cost: float
    degenerate: bool


class TaskSystem:
    """States, a distance matrix and named tasks (cost vectors over states)."""

    def __init__(self, states: Sequence[Hashable], dist, tasks: dict, name: str = "ts"):
        self.states = tuple(states)
        self.index = {s: i for i, s in enumerate(self.states)}
        self.dist = np.array(dist, dtype=float)
        m = len(self.states)
        if self.dist.shape != (m, m) or np.any(self.dist < 0) or not np.all(np.isfinite(self.dist)):
            raise ValueError("distance must be a finite non-negative matrix over the states")
        self.tasks = {k: np.array(v, dtype=float) for k, v in tasks.items()}
        for k, v in self.tasks.items():
            if v.shape != (m,) or np.any(v < 0):
                raise ValueError(f"task {k!r} needs one non-negative cost per state")
            if not np.any(np.isfinite(v)):
                raise ValueError(f"task {k!r} is infinite in every state")
        self.name = name

    def __repr__(self):
        return f"TaskSystem({self.name}, {len(self.states)} states, {len(self.tasks)} tasks)"

    @property
    def size(self) -> int:
        return len(self.states)

    def d(self, s, s2) -> float:
        return float(self.dist[self.index[s], self.index[s2]])

    def cost(self, task, s) -> float:
        return float(self.tasks[task][self.index[s]])

    def havens(self, task) -> set:
        v = self.tasks[task]
        return {s for i, s in enumerate(self.states) if self.dist[i, i] + v[i] == 0}

    def cost_matrix(self, sigma: Sequence) -> np.ndarray:
        if not sigma:
            return np.zeros((0, self.size))
        return np.stack([self.tasks[t] for t in sigma])

    def profile(self) -> CostProfile:
        big, small = 0.0, INF
        for v in self.tasks.values():
            for i in range(self.size):
                for j in range(self.size):
                    if math.isfinite(v[j]):
                        big = max(big, self.dist[i, j] + v[j])
            for i in range(self.size):
                c = self.dist[i, i] + v[i]
                if math.isfinite(c) and c > 0:
                    small = min(small, c)
        for i in range(self.size):
            for j in range(self.size):
                if i != j and self.dist[i, j] > 0:
                    small = min(small, self.dist[i, j])
        degenerate = not math.isfinite(small)
        return CostProfile(float(big), 0.0 if degenerate else float(small), degenerate)

    def to_json(self) -> str:
        return json.dumps({
            "states": list(self.states),
            "distance": self.dist.tolist(),
            "tasks": {str(k): ["inf" if not math.isfinite(c) else c for c in v] for k, v in self.tasks.items()},
        })

    @classmethod
    def from_json(cls, doc: str | dict) -> "TaskSystem":
        d = json.loads(doc) if isinstance(doc, str) else doc
        tasks = {k: [INF if c == "inf" else float(c) for c in v] for k, v in d["tasks"].items()}
        states = [tuple(s) if isinstance(s, list) else s for s in d["states"]]
        return cls(states, d["distance"], tasks)


def max_cost(ts: TaskSystem) -> float:
    return ts.profile().max_cost


def min_cost(ts: TaskSystem) -> float:
    return ts.profile().min_cost


def is_lazy_ts(ts: TaskSystem, tol: float = 1e-12) -> bool:
    """Zero self-distance, positive distance between distinct states, triangle inequality."""
    D = ts.dist
    if np.any(np.abs(np.diag(D)) > tol):
        return False
    off = ~np.eye(ts.size, dtype=bool)
    if np.any(D[off] <= 0):
        return False
    via = (D[:, :, None] + D[None, :, :]).min(axis=1)
    return bool(np.all(D <= via + tol))


def ts_problem(ts: TaskSystem) -> OnlineProblem:
    states = ts.states
    task_names = tuple(ts.tasks)

    def answer_alphabet(history, task):
        return tuple(s for s in states if math.isfinite(ts.cost(task, s)))

    def step_cost(history, task, s):
        prev = history[2][-1] if history[2] else history[0]
        return ts.d(prev, s) + ts.cost(task, s)

    return OnlineProblem(
        name=ts.name,
        initial_states=states,
        request_alphabet=lambda s0, past: task_names,
        answer_alphabet=answer_alphabet,
        step_cost=step_cost,
        observe=lambda task: task,
        history_dependent=True,
    )


def serve(ts: TaskSystem, alg, s0, sigma: Sequence, advice: str | None = None):
    """(per-step costs, states) of alg on sigma from s0."""
    tr = run(ts_problem(ts), alg, InputSequence(s0, tuple(sigma)), advice)
    return tr.steps, tr.answers


def path_cost(ts: TaskSystem, s0, sigma: Sequence, path: Sequence) -> float:
    total, prev = 0.0, s0
    for t, s in zip(sigma, path):
        total += ts.d(prev, s) + ts.cost(t, s)
        prev = s
    return total


def opt_offline(ts: TaskSystem, sigma: Sequence, s0) -> float:
    """Exact offline optimum by dynamic programming over states."""
    if not sigma:
        return 0.0
    return _kernels.ts_dp(ts.dist, ts.cost_matrix(sigma), ts.index[s0])


def opt_exhaustive(ts: TaskSystem, sigma: Sequence, s0, cap: int | None = None) -> float:
    """Minimum over every state path, all paths scored at once."""
    n, N = len(sigma), ts.size
    if n == 0:
        return 0.0
    cap = caps().max_inputs if cap is None else cap
    if N**n > cap:
        raise CapExceeded("state paths", N**n, cap, "use opt_offline")
    C = ts.cost_matrix(sigma)
    paths = np.indices((N,) * n, dtype=np.int16).reshape(n, -1)
    total = ts.dist[ts.index[s0], paths[0]] + C[0, paths[0]]
    for t in range(1, n):
        total = total + ts.dist[paths[t - 1], paths[t]] + C[t, paths[t]]
    return float(total.min())


# ----------------------------------------------------------- instances


def paging_as_lts(k: int, N: int) -> TaskSystem:
    """States are k-subsets of N pages; moving costs the number of pages loaded."""
    if not 0 < k < N:
        raise ValueError("need 0 < k < N")
    states = tuple(itertools.combinations(range(N), k))
    dist = [[len(set(c2) - set(c1)) for c2 in states] for c1 in states]
    tasks = {p: [0.0 if p in c else INF for c in states] for p in range(N)}
    return TaskSystem(states, dist, tasks, f"paging(k={k},N={N})")


def ssm2(wake_cost: float = 2.0) -> TaskSystem:
    """Two-state sleep management: idling while ON costs 1 per step, waking costs B."""
    states = ("ON", "SLEEP")
    dist = [[0.0, 0.0], [wake_cost, 0.0]]
    tasks = {"idle": [1.0, 0.0], "job": [0.0, INF]}
    return TaskSystem(states, dist, tasks, f"ssm2(B={wake_cost})")


def uniform_metrical(N: int, rng: np.random.Generator | None = None, n_tasks: int = 4) -> TaskSystem:
    """N states at mutual distance 1, tasks with costs in {0, 1, inf}."""
    rng = rng or np.random.default_rng(0)
    dist = 1.0 - np.eye(N)
    tasks = {}
    for j in range(n_tasks):
        v = rng.choice([0.0, 1.0, INF], size=N)
        if not np.any(np.isfinite(v)):
            v[rng.integers(N)] = 0.0
        tasks[f"t{j}"] = v
    return TaskSystem(range(N), dist, tasks, f"uniform({N})")


def random_lts(rng: np.random.Generator, N: int = 4, n_tasks: int = 3, max_d: int = 3) -> TaskSystem:
    """Metric closure of random integer weights plus random tasks."""
    W = rng.integers(1, max_d + 1, size=(N, N)).astype(float)
    W = np.minimum(W, W.T)
    np.fill_diagonal(W, 0.0)
    for m in range(N):
        W = np.minimum(W, W[:, m : m + 1] + W[m : m + 1, :])
    tasks = {}
    for j in range(n_tasks):
        v = rng.choice([0.0, 0.0, 1.0, 2.0, INF], size=N)
        if not np.any(np.isfinite(v)):
            v[rng.integers(N)] = 0.0
        tasks[j] = v
    return TaskSystem(range(N), W, tasks, f"lts({N})")


# ------------------------------------------------------------ paging algs


def lru_faults(k: int, sigma: Sequence, initial: Sequence | None = None) -> int:
    cache = list(initial or [])  # most recent last
    faults = 0
    for p in sigma:
        if p in cache:
            cache.remove(p)
        else:
            faults += 1
            if len(cache) >= k:
                cache.pop(0)
        cache.append(p)
    return faults


def fifo_faults(k: int, sigma: Sequence, initial: Sequence | None = None) -> int:
    cache = list(initial or [])
    faults = 0
    for p in sigma:
        if p not in cache:
            faults += 1
            if len(cache) >= k:
                cache.pop(0)
            cache.append(p)
    return faults


def _lru_cache_after(initial: Sequence, past: Sequence, k: int) -> list:
    cache = list(initial)
    for p in past:
        if p in cache:
            cache.remove(p)
        elif len(cache) >= k:
            cache.pop(0)
        cache.append(p)
    return cache


def lru_ts_alg(k: int) -> DeterministicAlgorithm:
    """LRU as a task-system algorithm: the answer is the sorted cache."""

    def decide(history, page, advice=""):
        cache = _lru_cache_after(history[0], history[1] + (page,), k)
        return tuple(sorted(cache))

    return DeterministicAlgorithm(decide, "lru")


def fifo_ts_alg(k: int) -> DeterministicAlgorithm:
    def decide(history, page, advice=""):
        cache = list(history[0])
        for p in history[1] + (page,):
            if p not in cache:
                cache.pop(0)
                cache.append(p)
        return tuple(sorted(cache))

    return DeterministicAlgorithm(decide, "fifo")


# --------------------------------------------------------------- laziness


def _shadow_states(ts: TaskSystem, alg, history, task, advice: str = "") -> list:
    """States alg would have chosen on the past requests plus the current task."""
    s0, past = history[0], history[1]
    states: list = []
    for i, t in enumerate(past + (task,)):
        h = (s0, past[:i], tuple(states))
        states.append(alg.decide(h, t, advice))
    return states


def make_lazy(ts: TaskSystem, alg: DeterministicAlgorithm) -> DeterministicAlgorithm:
    """Stay put on a haven, otherwise go where alg goes."""

    def decide(history, task, advice=""):
        cur = history[2][-1] if history[2] else history[0]
        if cur in ts.havens(task):
            return cur
        return _shadow_states(ts, alg, history, task, advice)[-1]

    return DeterministicAlgorithm(decide, f"lazy[{alg.name}]")


# ------------------------------------------------------------------ Hedge


def _hedge_probs(cum: np.ndarray, beta: float, delta: float) -> np.ndarray:
    # shift by the min for numerical stability; ratios are unchanged
    expo = (cum - cum.min()) / delta
    w = beta**expo
    return w / w.sum()


def _coupled_transition(p: np.ndarray, p2: np.ndarray) -> np.ndarray:
    """Stay with probability min(1, p2/p); moved mass goes to the states that gained."""
    m = len(p)
    T = np.zeros((m, m))
    inc = np.clip(p2 - p, 0.0, None)
    tot = inc.sum()
    for i in range(m):
        stay = 1.0 if p[i] <= 0 else min(1.0, p2[i] / p[i])
        T[i, i] = stay
        if stay < 1.0 and tot > 0:
            T[i] += (1.0 - stay) * inc / tot
    return T


class HedgeTrace:
    """Expert paths, costs and the master's distributions on one input."""

    def __init__(self, ts: TaskSystem, experts: Sequence, eps: float, delta: float, inp: InputSequence):
        m = len(experts)
        self.paths = []
        self.expert_costs = np.zeros(m)
        steps = np.zeros((m, inp.n))
        for i, e in enumerate(experts):
            tr = run(ts_problem(ts), e, inp)
            self.paths.append(tr.answers)
            steps[i] = tr.steps
            self.expert_costs[i] = tr.total
        beta = 1.0 / (1.0 + eps)
        cum = np.cumsum(steps, axis=1)
        self.probs = [np.full(m, 1.0 / m)]
        for t in range(inp.n):
            self.probs.append(_hedge_probs(cum[:, t], beta, delta))
        self.ts, self.inp, self.m = ts, inp, m

    def expected_cost(self) -> float:
        ts, inp = self.ts, self.inp
        total = []
        prev_states = [inp.initial_state] * self.m
        for t, task in enumerate(inp.requests):
            p, p2 = self.probs[t], self.probs[t + 1]
            T = _coupled_transition(p, p2)
            cur = [path[t] for path in self.paths]
            C = np.array([[ts.d(prev_states[i], cur[j]) + ts.cost(task, cur[j]) for j in range(self.m)]
                          for i in range(self.m)])
            total.append(float(np.sum(p[:, None] * T * C)))
            prev_states = cur
        return float(np.sum(np.array(total))) if total else 0.0


def hedge_envelope(min_expert: float, eps: float, delta: float, m: int) -> float:
    return (1 + 2 * eps) * min_expert + (7 / 6 + 1 / eps) * delta * math.log(m)


def hedge_combine(ts: TaskSystem, experts: Sequence[DeterministicAlgorithm], eps: float,
                  delta: float | None = None) -> RandomizedAlgorithm:
    """Follow one expert at a time, reweighting by beta^(cost/delta) with beta = 1/(1+eps)."""
    if not experts:
        raise ValueError("need at least one expert")
    if eps <= 0:
        raise ValueError("eps must be positive")
    experts = list(experts)
    delta = delta if delta is not None else max_cost(ts)
    if delta <= 0:
        raise ValueError("max cost must be positive")
    m = len(experts)

    def exact(inp):
        return HedgeTrace(ts, experts, eps, delta, inp).expected_cost()

    def draw(rng):
        uniforms = rng.random(4096)

        def decide(history, task, advice=""):
            past = history[1] + (task,)
            inp = InputSequence(history[0], past)
            tr = HedgeTrace(ts, experts, eps, delta, inp)
            cur = 0 if m == 1 else int(np.searchsorted(np.cumsum(tr.probs[0]), uniforms[0], side="right"))
            cur = min(cur, m - 1)
            for t in range(len(past)):
                T = _coupled_transition(tr.probs[t], tr.probs[t + 1])
                u = uniforms[(t + 1) % len(uniforms)]
                cur = min(int(np.searchsorted(np.cumsum(T[cur]), u, side="right")), m - 1)
            return tr.paths[cur][-1]

        return DeterministicAlgorithm(decide, "hedge-sample")

    return RandomizedAlgorithm(draw_fn=draw, exact=exact, name=f"hedge[m={m},eps={eps}]")


# ------------------------------------------------------ phases and epochs


def phase_partition(ts: TaskSystem, sigma: Sequence) -> list[int]:
    """Indices of the tasks that end a phase.

    A phase ends once no state has been a haven for every task of the phase.
    """
    boundaries = []
    M = set(ts.states)
    for i, t in enumerate(sigma):
        M &= ts.havens(t)
        if not M:
            boundaries.append(i)
            M = set(ts.states)
    return boundaries


def epoch_length(ts: TaskSystem, eps: float, c: float, alpha: float) -> int:
    """Complete phases per epoch: ceil((alpha + (c + eps) Delta) / (eps delta))."""
    prof = ts.profile()
    if prof.degenerate:
        raise ValueError("task system has no positive cost; phases are meaningless")
    return math.ceil((alpha + (c + eps) * prof.max_cost) / (eps * prof.min_cost))


def epoch_partition(ts: TaskSystem, sigma: Sequence, eps: float, c: float, alpha: float) -> list[int]:
    P = epoch_length(ts, eps, c, alpha)
    phases = phase_partition(ts, sigma)
    return [phases[j] for j in range(P - 1, len(phases), P)]


def phase_costs(steps: Sequence[float], boundaries: Sequence[int]) -> list[float]:
    """Sum of step costs per phase; the trailing incomplete phase is included."""
    out, start = [], 0
    for b in boundaries:
        out.append(float(np.sum(np.asarray(steps[start : b + 1], dtype=float))))
        start = b + 1
    if start < len(steps):
        out.append(float(np.sum(np.asarray(steps[start:], dtype=float))))
    return out


def opt_chasing_wrap(ts: TaskSystem, alg: DeterministicAlgorithm, x: float | None = None,
                     eps: float = 1.0) -> DeterministicAlgorithm:
    """Follow alg until its in-phase cost reaches x, then stay inside the haven set.

    x defaults to |S| Delta / eps.  On the task that closes the phase the
    wrapper rejoins alg's state.
    """
    if ts.profile().degenerate:
        raise ValueError("task system has no positive cost")
    if x is None:
        x = ts.size * max_cost(ts) / eps

    def decide(history, task, advice=""):
        s0, past = history[0], history[1]
        shadow = _shadow_states(ts, alg, history, task, advice)
        seq = past + (task,)
        # replay phase bookkeeping up to the current task
        M = set(ts.states)
        base_cost = 0.0
        prev = s0
        for i, t in enumerate(seq):
            M = M & ts.havens(t)
            last = i == len(seq) - 1
            if last:
                cur = history[2][-1] if history[2] else s0
                if not M:
                    return shadow[i]
                if base_cost >= x:
                    return cur if cur in M else min(M, key=ts.index.get)
                return shadow[i]
            base_cost += ts.d(prev, shadow[i]) + ts.cost(t, shadow[i])
            prev = shadow[i]
            if not M:
                M = set(ts.states)
                base_cost = 0.0
        raise AssertionError("unreachable")

    return DeterministicAlgorithm(decide, f"opt-chase[{alg.name}]")


# ---------------------------------------------------- block concatenation


def star_cost(ts: TaskSystem, alg: DeterministicAlgorithm, blocks: Sequence[Sequence], s0) -> tuple[float, float]:
    """(ALG* on the marked blocks, ALG on their plain concatenation).

    ALG* restarts each block from s0 but otherwise copies ALG's states.
    """
    sigma = [t for b in blocks for t in b]
    steps, states = serve(ts, alg, s0, sigma)
    plain = float(np.sum(np.asarray(steps, dtype=float)))
    star, pos = 0.0, 0
    for b in blocks:
        prev = s0
        for t in b:
            s = states[pos]
            star += ts.d(prev, s) + ts.cost(t, s)
            prev = s
            pos += 1
    return star, plain
