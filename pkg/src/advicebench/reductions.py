"""Executable reductions: anti guessing to paging, weighted binary guessing to bin packing."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .core import (
    AdviceAlgorithm,
    DeterministicAlgorithm,
    self_delimiting_decode,
    self_delimiting_encode,
)

# ------------------------------------------------------------------ paging

# A paging policy picks the page to evict: policy(cache, past, page) -> victim.
# ``cache`` is a list ordered by insertion, ``past`` the requests served so far.
PagingPolicy = Callable[[list, tuple, int], int]


def lru_policy(cache: list, past: tuple, page: int) -> int:
    def last_use(p):
        for j in range(len(past) - 1, -1, -1):
            if past[j] == p:
                return j
        return -1

    return min(cache, key=lambda p: (last_use(p), cache.index(p)))


def fifo_policy(cache: list, past: tuple, page: int) -> int:
    return cache[0]


def belady_policy(sigma: Sequence[int]) -> PagingPolicy:
    """Offline farthest-in-future; it is told the whole sequence up front."""
    sig = tuple(sigma)

    def policy(cache, past, page):
        i = len(past)

        def next_use(p):
            for j in range(i + 1, len(sig)):
                if sig[j] == p:
                    return j
            return math.inf

        return max(sorted(cache), key=next_use)

    return policy


def simulate_paging(policy: PagingPolicy, k: int, sigma: Sequence[int], initial: Sequence[int]) -> list[bool]:
    """Per-request fault flags."""
    cache = list(initial)
    faults = []
    for i, p in enumerate(sigma):
        if p in cache:
            faults.append(False)
            continue
        faults.append(True)
        if len(cache) >= k:
            cache.remove(policy(cache, tuple(sigma[:i]), p))
        cache.append(p)
    return faults


@dataclass(frozen=True)
class PagingReductionInstance:
    k: int
    x: tuple
    sigma: tuple
    initial: tuple

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "x": list(self.x), "sigma": list(self.sigma), "initial": list(self.initial)})


def antisg_to_paging(x: Sequence[int], k: int) -> PagingReductionInstance:
    """Pages 0..k; the string's characters are the requested pages."""
    if any(not 0 <= c <= k for c in x):
        raise ValueError(f"characters must lie in 0..{k}")
    return PagingReductionInstance(k, tuple(x), tuple(x), tuple(range(k)))


def paging_adapter(policy: PagingPolicy, k: int) -> DeterministicAlgorithm:
    """Anti-(k+1) guesser that names the page currently outside the cache."""
    initial = tuple(range(k))

    def decide(history, visible, advice=""):
        past = history[1]
        cache = list(initial)
        for i, p in enumerate(past):
            if p not in cache:
                cache.remove(policy(cache, tuple(past[:i]), p))
                cache.append(p)
        (missing,) = set(range(k + 1)) - set(cache)
        return missing

    return DeterministicAlgorithm(decide, "paging-adapter")


# ------------------------------------------------------------- bin packing


def default_eps(n: int) -> Fraction:
    return Fraction(1, 2 ** (n + 3))


def midpoints(x: Sequence[int], eps: Fraction) -> list[Fraction]:
    """Phase-two item sizes.  After item i the interval shrinks to its upper half
    when x_i = 0 and to its lower half when x_i = 1, so every 1-item is larger
    than every 0-item."""
    lo, hi = Fraction(1, 3), Fraction(1, 2) - eps
    if not lo < hi:
        raise ValueError("eps too large: need 1/3 < 1/2 - eps")
    out = []
    for c in x:
        m = (lo + hi) / 2
        out.append(m)
        if c == 0:
            lo = m
        else:
            hi = m
    if not all(Fraction(1, 3) < m < Fraction(1, 2) - eps for m in out):
        raise ValueError("eps too large for the recurrence")
    return out


@dataclass(frozen=True)
class BinPackReductionInstance:
    x: tuple
    eps: Fraction
    phase1: tuple
    phase2: tuple
    phase3: tuple

    @property
    def items(self) -> tuple:
        return self.phase1 + self.phase2 + self.phase3

    @property
    def n(self) -> int:
        return len(self.x)

    def optimal_packing(self) -> list[list[Fraction]]:
        """n bins: each big item with a 1-midpoint, each 0-midpoint with its complement."""
        ones = [m for m, c in zip(self.phase2, self.x) if c == 1]
        zeros = [m for m, c in zip(self.phase2, self.x) if c == 0]
        bins = [[big, m] for big, m in zip(self.phase1, ones)]
        bins += [[m, 1 - m] for m in zeros]
        return bins

    def opt_lower_bound(self) -> int:
        """Items above 1/2 need their own bins; a bin holds at most two items above 1/3."""
        big = sum(1 for a in self.items if a > Fraction(1, 2))
        third = sum(1 for a in self.items if a > Fraction(1, 3))
        return max(big, -(-third // 2))

    def to_json(self) -> str:
        return json.dumps({
            "x": list(self.x),
            "eps": str(self.eps),
            "items": [str(a) for a in self.items],
        })


def bsg_to_binpack(x: Sequence[int], eps: Fraction | None = None) -> BinPackReductionInstance:
    x = tuple(int(c) for c in x)
    if any(c not in (0, 1) for c in x):
        raise ValueError("x must be binary")
    eps = default_eps(len(x)) if eps is None else Fraction(eps)
    mids = midpoints(x, eps)
    ones = sum(x)
    phase1 = tuple([Fraction(1, 2) + eps] * ones)
    phase3 = tuple(1 - m for m, c in zip(mids, x) if c == 0)
    return BinPackReductionInstance(x, eps, phase1, tuple(mids), phase3)


# packer(bins, item) -> index of the bin to use; len(bins) opens a new one
Packer = Callable[[list, Fraction], int]


def first_fit_packer(bins: list, item: Fraction) -> int:
    for i, b in enumerate(bins):
        if sum(b) + item <= 1:
            return i
    return len(bins)


def best_fit_packer(bins: list, item: Fraction) -> int:
    best, best_i = None, len(bins)
    for i, b in enumerate(bins):
        room = 1 - sum(b) - item
        if room >= 0 and (best is None or room < best):
            best, best_i = room, i
    return best_i


def pack(packer: Packer, items: Sequence[Fraction]) -> list[list[Fraction]]:
    bins: list[list[Fraction]] = []
    for a in items:
        i = packer(bins, a)
        if i == len(bins):
            bins.append([a])
        else:
            if sum(bins[i]) + a > 1:
                raise ValueError(f"packer overfilled bin {i}")
            bins[i].append(a)
    return bins


def first_fit(items: Sequence[Fraction]) -> int:
    return len(pack(first_fit_packer, items))


def best_fit(items: Sequence[Fraction]) -> int:
    return len(pack(best_fit_packer, items))


def exact_opt(items: Sequence[Fraction], cap: int = 12) -> int:
    """Fewest bins, by branch and bound over item-to-bin assignments."""
    if len(items) > cap:
        raise ValueError(f"exact_opt is limited to {cap} items")
    its = sorted((Fraction(a) for a in items), reverse=True)
    if any(not 0 < a <= 1 for a in its):
        raise ValueError("item sizes must lie in (0, 1]")
    best = [first_fit(its)]
    lower = math.ceil(sum(its))

    def rec(i, loads):
        if len(loads) >= best[0]:
            return
        if i == len(its):
            best[0] = len(loads)
            return
        a = its[i]
        tried = set()
        for j, load in enumerate(loads):
            if load + a <= 1 and load not in tried:
                tried.add(load)
                loads[j] = load + a
                rec(i + 1, loads)
                loads[j] = load
                if best[0] == lower:
                    return
        loads.append(a)
        rec(i + 1, loads)
        loads.pop()

    rec(0, [])
    return best[0]


def _advice_width(n: int) -> int:
    return 2 * math.ceil(math.log2(n + 2)) + 1


def _phase2_guesses(packer: Packer, phase1: Sequence[Fraction], mids: Sequence[Fraction]) -> tuple[list[int], list]:
    bins: list[list[Fraction]] = []
    for a in phase1:
        i = packer(bins, a)
        if i == len(bins):
            bins.append([a])
        else:
            bins[i].append(a)
    guesses = []
    for m in mids:
        i = packer(bins, m)
        if i == len(bins):
            bins.append([m])
            guesses.append(0)
        else:
            bins[i].append(m)
            guesses.append(1)
    return guesses, bins


def binpack_adapter(packer: Packer, n: int, eps: Fraction | None = None) -> AdviceAlgorithm:
    """BSG guesser: 1 when the next midpoint joins an existing bin, 0 when it opens one.

    The advice is |x|_1 + 1, self-delimited and zero-padded to a fixed width.
    """
    eps = default_eps(n) if eps is None else Fraction(eps)
    width = _advice_width(n)

    def oracle(inp):
        bits = self_delimiting_encode(sum(inp.requests) + 1)
        return bits + "0" * (width - len(bits))

    def decide(history, visible, advice):
        ones = self_delimiting_decode(advice)[0] - 1
        past = history[1]
        # the midpoint for this round depends only on the characters seen so far
        mids = midpoints(tuple(past) + (0,), eps)
        guesses, _ = _phase2_guesses(packer, [Fraction(1, 2) + eps] * ones, mids)
        return guesses[-1]

    return AdviceAlgorithm(lambda m: _advice_width(m), oracle, DeterministicAlgorithm(decide, "binpack-adapter"),
                           "binpack-adapter")


@dataclass(frozen=True)
class Audit:
    e0: int
    e1: int
    bins: int
    n: int
    guesses: tuple

    @property
    def e0_ok(self) -> bool:
        return self.e0 <= 2 * (self.bins - self.n)

    @property
    def e1_ok(self) -> bool:
        return self.e1 <= self.bins - self.n


def mistake_audit(packer: Packer, x: Sequence[int], eps: Fraction | None = None) -> Audit:
    """Pack the whole instance and count the adapter's two kinds of mistakes."""
    inst = bsg_to_binpack(x, eps)
    guesses, _ = _phase2_guesses(packer, inst.phase1, inst.phase2)
    total_bins = len(pack(packer, inst.items))
    e0 = sum(1 for g, c in zip(guesses, inst.x) if g == 1 and c == 0)
    e1 = sum(1 for g, c in zip(guesses, inst.x) if g == 0 and c == 1)
    return Audit(e0, e1, total_bins, inst.n, tuple(guesses))


# ----------------------------------------------------------- threshold


def threshold_ratio(t: float) -> float:
    return t / ((1 + t) * (2 + t)) + 1


def threshold_closed_form() -> float:
    """Maximum of threshold_ratio, attained at t = sqrt 2."""
    return threshold_ratio(math.sqrt(2.0))


def threshold_numeric() -> tuple[float, float]:
    res = minimize_scalar(lambda t: -threshold_ratio(t), bounds=(1e-9, 100.0), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x), float(-res.fun)


def random_binary(rng: np.random.Generator, n: int) -> tuple:
    return tuple(int(c) for c in rng.integers(0, 2, size=n))
