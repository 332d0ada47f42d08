"""Zero-sum cost games and the repeated matrix game.

Rows are the adversary's characters x, columns the algorithm's answers y;
A(x, y) is what the algorithm pays.  The solver shifts A to be positive and
runs a small tableau simplex (Bland's rule) on

    maximize sum(u)  subject to  (A + 1) u <= 1,  u >= 0

which works over floats or over ``fractions.Fraction`` for exact answers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    AdviceAlgorithm,
    DeterministicAlgorithm,
    OnlineProblem,
    RandomizedAlgorithm,
    RoundDistribution,
    bits_needed,
    int_to_bits,
    iid_rounds,
)
from .infotheory import FiniteDistribution

CERT_TOL = 1e-9
PIVOT_EPS = 1e-12


@dataclass(frozen=True)
class CostMatrix:
    rows: tuple

    def __init__(self, rows: Sequence[Sequence[float]]):
        rows = tuple(tuple(r) for r in rows)
        q = len(rows)
        if q == 0 or any(len(r) != q for r in rows):
            raise ValueError("cost matrix must be square and non-empty")
        if any(v < 0 for r in rows for v in r):
            raise ValueError("cost matrix entries must be non-negative")
        object.__setattr__(self, "rows", rows)

    @property
    def q(self) -> int:
        return len(self.rows)

    @property
    def inf_norm(self) -> float:
        return float(max(max(r) for r in self.rows))

    def __call__(self, x: int, y: int):
        return self.rows[x][y]

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def scaled(self, c: float) -> "CostMatrix":
        return CostMatrix([[c * v for v in r] for r in self.rows])

    def to_json(self) -> str:
        return json.dumps({"q": self.q, "rows": [[float(v) for v in r] for r in self.rows]})

    @classmethod
    def from_json(cls, doc: str | dict) -> "CostMatrix":
        d = json.loads(doc) if isinstance(doc, str) else doc
        m = cls(d["rows"])
        if "q" in d and d["q"] != m.q:
            raise ValueError(f"declared q={d['q']} but rows give {m.q}")
        return m


def sgkh_matrix(q: int) -> CostMatrix:
    """All ones minus the identity: pay 1 for a wrong guess."""
    return CostMatrix([[0 if x == y else 1 for y in range(q)] for x in range(q)])


def identity_matrix(q: int) -> CostMatrix:
    """Pay 1 when the answer equals the character (anti guessing)."""
    return CostMatrix([[1 if x == y else 0 for y in range(q)] for x in range(q)])


def bsg_matrix(s, t) -> CostMatrix:
    return CostMatrix([[0, s], [t, 0]])


@dataclass(frozen=True)
class GameSolution:
    value: float
    row_strategy: FiniteDistribution
    col_strategy: FiniteDistribution
    exact_value: Fraction | None = None
    exact_col: tuple | None = None
    exact_row: tuple | None = None

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "row_strategy": list(self.row_strategy.probs),
            "col_strategy": list(self.col_strategy.probs),
        }


class GameSolveError(RuntimeError):
    def __init__(self, msg: str, residuals: dict):
        super().__init__(f"{msg}: {residuals}")
        self.residuals = residuals


def _simplex_max_ones(B: list[list], zero, one, exact: bool):
    """Maximize sum(u) s.t. B u <= 1, u >= 0.  Returns (u, dual prices)."""
    m, n = len(B), len(B[0])
    # tableau rows: [B | I | rhs], objective row: [-1..., 0..., 0]
    T = [list(B[i]) + [one if j == i else zero for j in range(m)] + [one] for i in range(m)]
    obj = [-one] * n + [zero] * m + [zero]
    basis = [n + i for i in range(m)]
    eps = 0 if exact else PIVOT_EPS

    for _ in range(10_000):
        enter = next((j for j in range(n + m) if obj[j] < -eps), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            a = T[i][enter]
            if a > eps:
                ratio = T[i][-1] / a
                if best is None or ratio < best - eps or (abs(ratio - best) <= eps and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise GameSolveError("unbounded program", {"column": enter})
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * b for a, b in zip(T[i], T[leave])]
        f = obj[enter]
        obj = [a - f * b for a, b in zip(obj, T[leave])]
        basis[leave] = enter
    else:
        raise GameSolveError("simplex did not terminate", {})

    u = [zero] * n
    for i, bv in enumerate(basis):
        if bv < n:
            u[bv] = T[i][-1]
    duals = [obj[n + i] for i in range(m)]
    return u, duals


def solve_game(A: CostMatrix, exact: bool = False, tol: float = CERT_TOL) -> GameSolution:
    """Value and optimal mixed strategies, with certificates checked to tol."""
    q = A.q
    if exact:
        zero, one = Fraction(0), Fraction(1)
        B = [[Fraction(v) + 1 for v in r] for r in A.rows]
    else:
        zero, one = 0.0, 1.0
        B = [[float(v) + 1.0 for v in r] for r in A.rows]
    u, y = _simplex_max_ones(B, zero, one, exact)
    su = sum(u, zero)
    sy = sum(y, zero)
    if su <= 0 or sy <= 0:
        raise GameSolveError("degenerate program", {"sum_u": float(su), "sum_dual": float(sy)})
    vprime = one / su
    nu = [ui * vprime for ui in u]
    mu = [yi / sy for yi in y]
    value = vprime - 1

    if not exact:
        nu = list(np.clip(np.array(nu, dtype=float), 0.0, None))
        mu = list(np.clip(np.array(mu, dtype=float), 0.0, None))
        nu = [v / sum(nu) for v in nu]
        mu = [v / sum(mu) for v in mu]

    arr = A.array()
    nu_f = np.array([float(v) for v in nu])
    mu_f = np.array([float(v) for v in mu])
    vf = float(value)
    row_best = float(np.max(arr @ nu_f))
    col_best = float(np.min(mu_f @ arr))
    resid = {"max_x A(x,nu)-V": row_best - vf, "V-min_y A(mu,y)": vf - col_best}
    if row_best - vf > tol or vf - col_best > tol:
        raise GameSolveError("certificate check failed", resid)
    if exact:
        rows_exact = [sum((Fraction(A.rows[x][j]) * nu[j] for j in range(q)), Fraction(0)) for x in range(q)]
        cols_exact = [sum((Fraction(A.rows[i][yy]) * mu[i] for i in range(q)), Fraction(0)) for yy in range(q)]
        if max(rows_exact) != value or min(cols_exact) != value:
            raise GameSolveError("exact certificate check failed", resid)

    def dist(ps):
        fl = [float(p) for p in ps]
        s = sum(fl)
        return FiniteDistribution([(i, p / s) for i, p in enumerate(fl)])

    return GameSolution(
        vf,
        dist(mu),
        dist(nu),
        value if exact else None,
        tuple(nu) if exact else None,
        tuple(mu) if exact else None,
    )


def pure_bounds(A: CostMatrix) -> tuple[float, float]:
    """(max_x min_y A, min_y max_x A); the value lies between them."""
    arr = A.array()
    return float(arr.min(axis=1).max()), float(arr.max(axis=0).min())


# ------------------------------------------------------------------ RMG


def rmg_problem(A: CostMatrix, name: str | None = None) -> OnlineProblem:
    q = A.q
    chars = tuple(range(q))
    return OnlineProblem(
        name=name or f"rmg{q}",
        initial_states=("s",),
        request_alphabet=lambda s, past: chars,
        answer_alphabet=lambda h, v: chars,
        step_cost=lambda h, x, y: A.rows[x][y],
    )


def rmg_random_alg(A: CostMatrix, sol: GameSolution | None = None) -> RandomizedAlgorithm:
    """Pick a column from the optimal column strategy once, play it every round."""
    sol = sol or solve_game(A)
    pairs = [(DeterministicAlgorithm.constant(y), p) for y, p in sol.col_strategy.items() if p > 0]
    total = sum(p for _, p in pairs)
    return RandomizedAlgorithm.mixture([(a, p / total) for a, p in pairs], name="rmg-random")


def rmg_advice_alg(A: CostMatrix) -> AdviceAlgorithm:
    """Oracle writes the best fixed column in ceil(log2 q) bits; smallest index on ties."""
    q = A.q
    w = bits_needed(q)
    arr = A.array()

    def oracle(inp):
        totals = arr[list(inp.requests)].sum(axis=0) if inp.n else np.zeros(q)
        return int_to_bits(int(np.argmin(totals)), w)

    def decide(history, visible, advice):
        return min(int(advice, 2), q - 1) if w else 0

    return AdviceAlgorithm(lambda n: w, oracle, DeterministicAlgorithm(decide, "rmg-column"), "rmg-advice")


def rmg_hard_distribution(A: CostMatrix, n: int, sol: GameSolution | None = None) -> RoundDistribution:
    """n independent rounds of the optimal row strategy."""
    sol = sol or solve_game(A)

    def cost_fn(y, x):
        return A.rows[x][y]

    return iid_rounds("s", sol.row_strategy, n, cost_fn)
