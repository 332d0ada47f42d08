import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advicebench.infotheory import (
    K,
    NAMED_BOUNDS,
    DomainError,
    FiniteDistribution,
    K_inv_left,
    K_inv_right,
    antisg_upper,
    bsg_lower,
    chernoff_pair,
    check_convex_decreasing,
    direct_product_bound,
    entropy,
    evaluate,
    klem_bounds,
    kl,
    l1,
    martingale_failure_prob,
    pinsker,
    pinsker_round_floor,
    q_entropy,
    saturates_left,
    saturates_right,
    sg_lower,
    sg_upper,
    techlemma_bound,
)

probs = st.floats(min_value=0.01, max_value=0.99)
unit = st.floats(min_value=0.0, max_value=1.0)


def _dist(ws):
    w = np.asarray(ws, dtype=float)
    return FiniteDistribution(list(zip(range(len(w)), (w / w.sum()).tolist())))


weights = st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=5)


def test_distribution_rejects_bad_mass():
    with pytest.raises(ValueError):
        FiniteDistribution({0: 0.5, 1: 0.6})
    with pytest.raises(ValueError):
        FiniteDistribution({0: -0.1, 1: 1.1})


@given(weights)
def test_distribution_sums_to_one(ws):
    d = _dist(ws)
    assert abs(math.fsum(d.probs) - 1.0) <= 1e-12
    assert min(d.probs) >= 0


def test_entropy_and_kl_examples():
    assert entropy(FiniteDistribution.uniform(range(4))) == pytest.approx(2.0)
    assert entropy(FiniteDistribution({0: 1.0})) == 0.0
    mu, nu = FiniteDistribution.bernoulli(0.5), FiniteDistribution.bernoulli(0.25)
    assert kl(mu, nu) == pytest.approx(K(0.25, 0.5))
    with pytest.raises(DomainError):
        kl(FiniteDistribution.bernoulli(0.5), FiniteDistribution({1: 1.0}))


@given(weights, weights)
def test_kl_nonnegative_and_pinsker(a, b):
    n = min(len(a), len(b))
    mu, nu = _dist(a[:n]), _dist(b[:n])
    d = kl(mu, nu)
    assert d >= -1e-12
    assert kl(mu, mu) == pytest.approx(0.0, abs=1e-12)
    # Pinsker in bits: L1 <= sqrt(2 ln 2 * D)
    assert l1(mu, nu) <= pinsker(d) + 1e-9


def test_pinsker_examples():
    assert pinsker(0.0) == 0.0
    assert pinsker(0.5) == pytest.approx(0.83255, abs=1e-5)
    with pytest.raises(DomainError):
        pinsker(-1.0)


def test_K_endpoints():
    for y in (0.1, 0.3, 0.5, 0.9):
        assert K(y, 0.0) == pytest.approx(math.log2(1 / (1 - y)))
        assert K(y, 1.0) == pytest.approx(math.log2(1 / y))
        assert K(y, y) == 0.0
    with pytest.raises(DomainError):
        K(0.0, 0.5)
    with pytest.raises(DomainError):
        K(0.5, 1.5)


def test_K_midpoint_convexity_random_triples():
    rng = np.random.default_rng(7)
    for y, a, b in zip(rng.uniform(0.01, 0.99, 10_000), rng.random(10_000), rng.random(10_000)):
        assert K(y, (a + b) / 2) <= (K(y, a) + K(y, b)) / 2 + 1e-12


@given(probs, unit)
def test_K_monotone_branches(y, x):
    if x <= y:
        assert K(y, x) >= K(y, min(y, x + 1e-3)) - 1e-12
    else:
        assert K(y, x) >= K(y, max(y, x - 1e-3)) - 1e-12


@given(probs, st.floats(min_value=0.0, max_value=5.0))
def test_inverses(y, t):
    left, right = K_inv_left(y, t), K_inv_right(y, t)
    assert 0.0 <= left <= y <= right <= 1.0
    if saturates_left(y, t):
        assert left == 0.0
    else:
        assert K(y, left) == pytest.approx(t, abs=1e-9)
    if saturates_right(y, t):
        assert right == 1.0
    else:
        assert K(y, right) == pytest.approx(t, abs=1e-9)


def test_inverse_saturation_conventions():
    assert K_inv_left(0.5, 1.0) == 0.0  # K(1/2, 0) = 1
    assert K_inv_left(0.5, 5.0) == 0.0
    assert K_inv_right(0.25, 2.5) == 1.0  # K(1/4, 1) = 2
    assert K_inv_right(0.5, 0.0) == 0.5


def test_q_entropy():
    assert q_entropy(2, 0.5) == pytest.approx(1.0)
    assert q_entropy(3, 2 / 3) == pytest.approx(1.0)
    assert q_entropy(4, 0.0) == 0.0


def test_klem_bounds():
    nu = FiniteDistribution.uniform([0, 1])
    lo_hi = klem_bounds(nu, 0.0)
    for i, (lo, hi) in lo_hi.items():
        assert lo == pytest.approx(0.5) and hi == pytest.approx(0.5)
    for i, (lo, hi) in klem_bounds(nu, 1.0).items():
        assert (lo, hi) == (0.0, 1.0)


def test_direct_product_examples():
    assert direct_product_bound(lambda d: 3.0, 4, 2.0).value == pytest.approx(12.0)
    f = pinsker_round_floor(1.0, 1.0)
    assert direct_product_bound(f, 5, 0.0).value == pytest.approx(5.0)
    for r, b in ((4, 1.0), (10, 3.0), (3, 0.5)):
        dp = direct_product_bound(f, r, b).value
        assert dp >= techlemma_bound(1.0, 1.0, r, b).value - 1e-12
    with pytest.raises(ValueError):
        direct_product_bound(lambda d: d, 3, 1.0)  # increasing, rejected by the grid check
    with pytest.raises(ValueError):
        check_convex_decreasing(lambda d: -d * d, 1.0)


def test_martingale_examples():
    r = 10
    res = martingale_failure_prob(1.0, 1.0, 0.5, r, 0)
    assert math.log2(res.value) == pytest.approx(-K(0.5, 0.75) * r)
    assert K(0.5, 0.75) == pytest.approx(0.18872, abs=1e-5)
    big = martingale_failure_prob(1.0, 1.0, 0.5, r, 100)
    assert big.value == 1.0 and big.degenerate
    assert martingale_failure_prob(1.0, 0.0, 0.5, r, 0).degenerate
    with pytest.raises(DomainError):
        martingale_failure_prob(1.0, 1.0, 2.0, r, 0)


@given(st.integers(1, 40))
def test_chernoff_all_successes(n):
    lo, hi = chernoff_pair(0.5, 0.5, n)
    assert hi == pytest.approx(2.0**-n)
    assert lo == pytest.approx(hi / (n + 1))


def test_named_bound_values():
    # 100 * K_{1/2}(3/4), frozen from an independent evaluation
    assert sg_lower(2, 0.25, 100).value == pytest.approx(18.872187554086718, abs=1e-9)
    assert sg_lower(2, 0.25, 100).value == pytest.approx(100 * (1 + 0.75 * math.log2(0.75) + 0.25 * math.log2(0.25)))
    assert antisg_upper(2, 0.2, 10).value == pytest.approx(9.052110920411376, abs=1e-9)
    assert sg_upper(2, 0.25, 100).value >= sg_lower(2, 0.25, 100).value
    with pytest.raises(DomainError):
        sg_lower(2, 0.6, 10)
    with pytest.raises(DomainError):
        bsg_lower(2, 1, 0.1, 10)  # needs s <= t


def test_evaluate_dispatch():
    for fid in NAMED_BOUNDS:
        assert callable(NAMED_BOUNDS[fid])
    assert evaluate("sg_lower", q=2, alpha=0.25, n=100).formula_id == "sg_lower"
    with pytest.raises(ValueError):
        evaluate("no_such_bound")


@given(st.integers(2, 6), st.floats(min_value=0.01, max_value=0.45), st.integers(1, 200))
def test_lower_bounds_nonnegative(q, alpha, n):
    alpha = min(alpha, (q - 1) / q - 0.01)
    assert sg_lower(q, alpha, n).value >= 0
