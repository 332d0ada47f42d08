"""Entropy, KL divergence, the binary divergence K and the named bound formulas.

All logarithms are base 2.  Zero-mass terms use explicit branches instead of
relying on floating infinities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

LN2 = math.log(2.0)
BISECT_TOL = 1e-12
BISECT_ITERS = 200
SUM_TOL = 1e-12


class DomainError(ValueError):
    """A formula was evaluated outside the range where it holds."""


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability mass function over a finite set of hashable outcomes."""

    outcomes: tuple
    probs: tuple

    def __init__(self, masses: Mapping[Hashable, float] | Iterable[tuple[Hashable, float]]):
        items = list(masses.items()) if isinstance(masses, Mapping) else list(masses)
        outs = tuple(o for o, _ in items)
        ps = tuple(float(p) for _, p in items)
        if len(set(outs)) != len(outs):
            raise ValueError("duplicate outcomes")
        if any(p < 0 for p in ps):
            raise ValueError("negative mass")
        if not outs or abs(math.fsum(ps) - 1.0) > SUM_TOL:
            raise ValueError(f"masses sum to {math.fsum(ps)!r}, not 1")
        object.__setattr__(self, "outcomes", outs)
        object.__setattr__(self, "probs", ps)

    @classmethod
    def uniform(cls, outcomes: Iterable[Hashable]) -> "FiniteDistribution":
        outs = list(outcomes)
        return cls([(o, 1.0 / len(outs)) for o in outs])

    @classmethod
    def bernoulli(cls, p: float) -> "FiniteDistribution":
        return cls([(0, 1.0 - p), (1, p)])

    def __getitem__(self, outcome) -> float:
        return self.as_dict().get(outcome, 0.0)

    def __len__(self) -> int:
        return len(self.outcomes)

    def items(self):
        return zip(self.outcomes, self.probs)

    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, self.probs))

    def support(self) -> set:
        return {o for o, p in self.items() if p > 0}

    def sample(self, rng: np.random.Generator, size: int | None = None):
        idx = rng.choice(len(self.outcomes), size=size, p=np.asarray(self.probs))
        if size is None:
            return self.outcomes[int(idx)]
        return [self.outcomes[int(i)] for i in idx]


@dataclass(frozen=True)
class BoundResult:
    value: float
    regime: str  # "valid" or "degenerate"
    formula_id: str

    @property
    def degenerate(self) -> bool:
        return self.regime == "degenerate"

    def as_dict(self) -> dict:
        return {"formula": self.formula_id, "value": self.value, "regime": self.regime}


def _result(fid: str, value: float, degenerate: bool = False) -> BoundResult:
    return BoundResult(float(value), "degenerate" if degenerate else "valid", fid)


# ------------------------------------------------------------------ basics


def entropy(mu: FiniteDistribution) -> float:
    return -math.fsum(p * math.log2(p) for p in mu.probs if p > 0)


def kl(mu: FiniteDistribution, nu: FiniteDistribution) -> float:
    """D(mu || nu) in bits; raises if supp(mu) is not inside supp(nu)."""
    nd = nu.as_dict()
    terms = []
    for o, p in mu.items():
        if p == 0:
            continue
        qv = nd.get(o, 0.0)
        if qv == 0:
            raise DomainError(f"outcome {o!r} has mass under mu but not under nu")
        terms.append(p * math.log2(p / qv))
    return max(0.0, math.fsum(terms))


def l1(mu: FiniteDistribution, nu: FiniteDistribution) -> float:
    a, b = mu.as_dict(), nu.as_dict()
    return math.fsum(abs(a.get(o, 0.0) - b.get(o, 0.0)) for o in set(a) | set(b))


def pinsker(d: float) -> float:
    """Upper bound on the L1 distance given a KL divergence d in bits."""
    if d < 0:
        raise DomainError("KL divergence must be non-negative")
    return math.sqrt(2.0 * LN2 * d)


# ------------------------------------------------------------- K function


def _check_y(y: float) -> None:
    if not 0.0 < y < 1.0:
        raise DomainError(f"K needs 0 < y < 1, got {y!r}")


def K(y: float, x: float) -> float:
    """Binary divergence D(Bernoulli(x) || Bernoulli(y)) in bits."""
    _check_y(y)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"K needs 0 <= x <= 1, got {x!r}")
    out = 0.0
    if x > 0:
        out += x * math.log2(x / y)
    if x < 1:
        out += (1.0 - x) * math.log2((1.0 - x) / (1.0 - y))
    return max(0.0, out)


def _bisect(fn: Callable[[float], float], lo: float, hi: float, target: float, increasing: bool) -> float:
    for _ in range(BISECT_ITERS):
        if hi - lo <= BISECT_TOL:
            break
        mid = 0.5 * (lo + hi)
        above = fn(mid) > target
        if above == increasing:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def K_inv_left(y: float, t: float) -> float:
    """x in [0, y] with K(y, x) = t; 0 when t exceeds K(y, 0)."""
    _check_y(y)
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return y
    if t >= K(y, 0.0):
        return 0.0
    return _bisect(lambda x: K(y, x), 0.0, y, t, increasing=False)


def K_inv_right(y: float, t: float) -> float:
    """x in [y, 1] with K(y, x) = t; 1 when t exceeds K(y, 1)."""
    _check_y(y)
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return y
    if t >= K(y, 1.0):
        return 1.0
    return _bisect(lambda x: K(y, x), y, 1.0, t, increasing=True)


def saturates_left(y: float, t: float) -> bool:
    return t > K(y, 0.0)


def saturates_right(y: float, t: float) -> bool:
    return t > K(y, 1.0)


def q_entropy(q: int, x: float) -> float:
    """q-ary entropy h_q(x), logarithms to base q."""
    if q < 2:
        raise DomainError("q must be at least 2")
    if not 0.0 <= x <= 1.0:
        raise DomainError("x must lie in [0, 1]")
    out = x * math.log2(q - 1)
    if x > 0:
        out -= x * math.log2(x)
    if x < 1:
        out -= (1 - x) * math.log2(1 - x)
    return out / math.log2(q)


def klem_bounds(nu: FiniteDistribution, d: float) -> dict:
    """Per-outcome interval that mu(i) must lie in whenever kl(mu, nu) <= d."""
    if d < 0:
        raise DomainError("d must be non-negative")
    out = {}
    for o, p in nu.items():
        if not 0.0 < p < 1.0:
            raise DomainError(f"mass of {o!r} must lie strictly between 0 and 1")
        out[o] = (K_inv_left(p, d), K_inv_right(p, d))
    return out


# ------------------------------------------------------ product theorems


def check_convex_decreasing(f: Callable[[float], float], hi: float, points: int = 1001, tol: float = 1e-9) -> None:
    xs = np.linspace(0.0, hi, points)
    ys = np.array([f(float(x)) for x in xs])
    scale = tol * max(1.0, float(np.max(np.abs(ys))))
    if np.any(np.diff(ys) > scale):
        i = int(np.argmax(np.diff(ys)))
        raise DomainError(f"f is not non-increasing near d={xs[i]:.6g}")
    second = ys[:-2] - 2 * ys[1:-1] + ys[2:]
    if np.any(second < -scale):
        i = int(np.argmin(second))
        raise DomainError(f"f is not convex near d={xs[i + 1]:.6g}")


def direct_product_bound(f: Callable[[float], float], r: int, b: float, check_hi: float | None = None) -> BoundResult:
    """r * f(b / r) after grid-checking that f is convex and non-increasing."""
    if r < 1 or b < 0:
        raise DomainError("need r >= 1 and b >= 0")
    hi = check_hi if check_hi is not None else max(1.0, 2.0 * b / r)
    check_convex_decreasing(f, hi)
    return _result("direct_product", r * f(b / r))


def pinsker_round_floor(t: float, M: float) -> Callable[[float], float]:
    """Per-round floor t - M*sqrt(d ln 4): cost bounded by M, Pinsker on d bits."""
    return lambda d: t - M * math.sqrt(d * math.log(4.0))


def martingale_failure_prob(t: float, s: float, eps: float, r: int, b: float) -> BoundResult:
    """Bound on Pr[cost <= (t - eps) r] when b advice bits are read over r rounds."""
    if t <= 0 or s < 0 or not 0 < eps <= t or r < 1 or b < 0:
        raise DomainError("need t > 0, s >= 0, 0 < eps <= t, r >= 1, b >= 0")
    if s == 0:
        return _result("martingale", 0.0, degenerate=True)
    gamma = s * s / (t * t)
    alpha = eps / t
    y = gamma / (1 + gamma)
    x = (alpha + gamma) / (1 + gamma)
    expo = b - K(y, min(1.0, x)) * r
    if expo >= 0:
        return _result("martingale", 1.0, degenerate=True)
    return _result("martingale", 2.0**expo)


def chernoff_pair(p: float, eps: float, n: int) -> tuple[float, float]:
    """(lower, upper) for Pr[Bin(n, p) >= (p + eps) n]."""
    if not 0 < p < 1 or eps <= 0 or p + eps > 1 or n < 0:
        raise DomainError("need 0 < p < 1, eps > 0, p + eps <= 1, n >= 0")
    upper = 2.0 ** (-K(p, p + eps) * n)
    return upper / (n + 1), upper


def azuma_simple(d: float, t: float, n: int) -> float:
    if d <= 0 or t < 0 or n < 0:
        raise DomainError("need d > 0, t >= 0, n >= 0")
    return math.exp(-t * t * n / (2 * d * d))


# ------------------------------------------------------------ named bounds


def harmonic(k: int) -> float:
    return math.fsum(1.0 / i for i in range(1, k + 1))


def _q_alpha(q, alpha, hi, name):
    if q < 2:
        raise DomainError(f"{name}: q must be at least 2")
    if not 0 < alpha < hi:
        raise DomainError(f"{name}: alpha must lie in (0, {hi:.6g})")


def sg_lower(q: int, alpha: float, n: int) -> BoundResult:
    """Bits needed to make at most alpha*n wrong guesses in q-SGKH."""
    _q_alpha(q, alpha, (q - 1) / q, "sg_lower")
    return _result("sg_lower", K(1 / q, 1 - alpha) * n)


def sg_upper(q: int, alpha: float, n: int) -> BoundResult:
    """Covering-code analogue of antisg_upper; a sufficient number of bits."""
    _q_alpha(q, alpha, (q - 1) / q, "sg_upper")
    return _result("sg_upper", K(1 / q, 1 - alpha) * n + math.log2((n + 1) * math.log(q) * n + 1))


def antisg_lower(q: int, alpha: float, n: int) -> BoundResult:
    _q_alpha(q, alpha, 1 / q, "antisg_lower")
    return _result("antisg_lower", K(1 / q, alpha) * n)


def antisg_upper(q: int, alpha: float, n: int) -> BoundResult:
    _q_alpha(q, alpha, 1 / q, "antisg_upper")
    return _result("antisg_upper", K(1 / q, alpha) * n + math.log2((n + 1) * math.log(q) * n + 1))


def bsg_lower(s: float, t: float, alpha: float, n: int) -> BoundResult:
    if not 0 < s <= t:
        raise DomainError("bsg_lower: need 0 < s <= t")
    v = s * t / (s + t)
    if not 0 < alpha < v:
        raise DomainError(f"bsg_lower: alpha must lie in (0, st/(s+t) = {v:.6g})")
    return _result("bsg_lower", K(s / (s + t), alpha / t) * n)


def rmg_lower(eps: float, inf_norm: float, n: int) -> BoundResult:
    if eps <= 0 or inf_norm <= 0:
        raise DomainError("rmg_lower: need eps > 0 and a nonzero matrix")
    return _result("rmg_lower", eps * eps * n / (2 * LN2 * inf_norm * inf_norm))


def paging_lower(k: int, c: float, eps: float, n: int) -> BoundResult:
    hk = harmonic(k)
    if k < 2 or not 1 < c < hk or eps <= 0 or n < 1:
        raise DomainError("paging_lower: need k >= 2, 1 < c < H_k, eps > 0, n >= 1")
    x = c / ((k + 1) * hk - eps) + c / n
    if not 0 < x < 1 / (k + 1):
        raise DomainError("paging_lower: c/((k+1)H_k - eps) + c/n must lie below 1/(k+1)")
    return _result("paging_lower", K(1 / (k + 1), x) * n)


def hsgg_exponent(k: int, n: int, b: float) -> BoundResult:
    if k < 2 or n < 1 or b < 0:
        raise DomainError("hsgg_exponent: need k >= 2, n >= 1, b >= 0")
    return _result("hsgg_exponent", b - 0.5 * math.log2(math.sqrt(k) / 16) * n)


def lor_prob(b: float, m: int, r: int) -> BoundResult:
    if m < 1 or r < 0 or b < 0:
        raise DomainError("lor_prob: need m >= 1, r >= 0, b >= 0")
    val = 2.0**b * (1 - 1 / m) ** r
    return _result("lor_prob", min(val, 1.0), degenerate=val >= 1)


def techlemma_bound(t: float, M: float, r: int, b: float) -> BoundResult:
    if r < 1 or b < 0 or M < 0:
        raise DomainError("techlemma_bound: need r >= 1, b >= 0, M >= 0")
    return _result("techlemma", r * (t - 2 * M * math.sqrt(b / r)))


NAMED_BOUNDS: dict[str, Callable[..., BoundResult]] = {
    "sg_lower": sg_lower,
    "sg_upper": sg_upper,
    "antisg_lower": antisg_lower,
    "antisg_upper": antisg_upper,
    "bsg_lower": bsg_lower,
    "rmg_lower": rmg_lower,
    "paging_lower": paging_lower,
    "hsgg_exponent": hsgg_exponent,
    "lor_prob": lor_prob,
    "techlemma_bound": techlemma_bound,
    "martingale": martingale_failure_prob,
}


def evaluate(formula_id: str, **params) -> BoundResult:
    try:
        fn = NAMED_BOUNDS[formula_id]
    except KeyError:
        raise DomainError(f"unknown formula {formula_id!r}; known: {sorted(NAMED_BOUNDS)}") from None
    return fn(**params)


# ------------------------------------------- cost floors implied by bounds


def sg_cost_floor(q: int, n: int, b: float) -> float:
    """Fewest expected mistakes in q-SGKH compatible with reading b bits."""
    return n * (1 - K_inv_right(1 / q, b / n))


def antisg_cost_floor(q: int, n: int, b: float) -> float:
    return n * K_inv_left(1 / q, b / n)


def bsg_cost_floor(s: float, t: float, n: int, b: float) -> float:
    return n * t * K_inv_left(s / (s + t), b / n)
