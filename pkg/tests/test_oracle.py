import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advicebench.config import CapExceeded
from advicebench.core import expected_cost, run
from advicebench.games import bsg_matrix, rmg_hard_distribution
from advicebench.guessing import guessing_problem, hsgg_hard_distribution, hsgg_problem, uniform_hard_distribution
from advicebench.oracle import (
    belady,
    best_advice_value,
    certify_bound,
    cost_floor,
    count_algorithms,
    enumerate_algorithms,
    paging_exhaustive,
    pointwise_optimum,
)
from advicebench.tasksystems import opt_offline, paging_as_lts

SG2 = guessing_problem("sgkh", 2)

# exact optimal b-bit expected cost on uniform 2-SGKH; n <= 3 agree with
# literal subset search, n = 4 with b <= 1 likewise (slow, in the acceptance suite)
FROZEN = {
    (1, 0): 0.5, (1, 1): 0.0, (1, 2): 0.0,
    (2, 0): 1.0, (2, 1): 0.5, (2, 2): 0.0,
    (3, 0): 1.5, (3, 1): 0.75, (3, 2): 0.5,
    (4, 0): 2.0, (4, 1): 1.25, (4, 2): 0.75,
}


def test_counts():
    assert count_algorithms(SG2, "s", 1) == 2
    assert count_algorithms(SG2, "s", 2) == 8
    assert count_algorithms(guessing_problem("sgkh", 3), "s", 1) == 3
    assert len(list(enumerate_algorithms(SG2, 2, "s"))) == 8
    with pytest.raises(CapExceeded):
        list(enumerate_algorithms(SG2, 4, "s", cap=100))


@pytest.mark.parametrize("n,b", sorted(FROZEN))
def test_frozen_values(n, b):
    dist = uniform_hard_distribution(2, n)
    assert best_advice_value(SG2, dist, b).value == pytest.approx(FROZEN[(n, b)], abs=1e-12)


@pytest.mark.parametrize("kind", ["sgkh", "anti"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_exact_matches_enumeration(kind, n):
    prob = guessing_problem(kind, 2)
    dist = uniform_hard_distribution(2, n, kind)
    for b in (0, 1, 2):
        dp = best_advice_value(prob, dist, b, "exact")
        en = best_advice_value(prob, dist, b, "enumerate")
        gr = best_advice_value(prob, dist, b, "greedy")
        assert dp.value == pytest.approx(en.value, abs=1e-12)
        assert gr.value >= dp.value - 1e-12 and gr.heuristic


@given(st.integers(0, 10**6), st.integers(1, 3))
def test_monotone_and_b0_is_best_single_algorithm(seed, n):
    rng = np.random.default_rng(seed)
    s, t = sorted(rng.integers(1, 4, size=2).tolist())
    prob = guessing_problem("bsg", 2, s, t)
    dist = rmg_hard_distribution(bsg_matrix(s, t), n)
    vals = [best_advice_value(prob, dist, b).value for b in range(4)]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    single = min(expected_cost(prob, a, dist).mean for a in enumerate_algorithms(prob, n, "s"))
    assert vals[0] == pytest.approx(single, abs=1e-12)
    # 2^n algorithms suffice to know the input
    assert best_advice_value(prob, dist, n).value == pytest.approx(pointwise_optimum(prob, dist), abs=1e-12)


def test_witness_reproduces_value():
    dist = uniform_hard_distribution(2, 3, "anti")
    prob = guessing_problem("anti", 2)
    res = best_advice_value(prob, dist, 1)
    assert len(res.witness) == 2
    total = sum(p * min(run(prob, a, inp).total for a in res.witness) for inp, p in dist.enumerate())
    assert total == pytest.approx(res.value, abs=1e-12)


def test_history_dependent_problem():
    prob = hsgg_problem(2, 2)
    dist = hsgg_hard_distribution(2, 2)
    dp = best_advice_value(prob, dist, 1, "exact")
    en = best_advice_value(prob, dist, 1, "enumerate")
    assert dp.value == pytest.approx(en.value, abs=1e-12)


def test_certify_report():
    params = {"q": 2, "n": 3, "t": 1.5, "M": 3, "r": 1, "L": 3}
    rep = certify_bound("sg_lower", params, SG2, uniform_hard_distribution(2, 3), [0, 1, 2])
    assert rep.sound
    doc = json.loads(json.dumps(rep.as_dict()))
    assert set(doc["rows"][0]) == {"b", "formula", "bound", "brute_force", "slack", "sound"}
    # a bound saturated at zero is vacuously sound
    assert cost_floor("sg_lower", params, 10) == pytest.approx(0.0, abs=1e-9)


def test_two_round_direct_product_sound():
    params = {"q": 2, "n": 2, "t": 0.5, "M": 1, "r": 2, "L": 1}
    for f in ("dp_pinsker", "dp_klem", "techlemma"):
        assert certify_bound(f, params, SG2, uniform_hard_distribution(2, 2), [0, 1, 2]).sound


def test_belady_matches_exhaustive_and_dp():
    rng = np.random.default_rng(12)
    for _ in range(50):
        k = int(rng.integers(1, 4))
        N = k + int(rng.integers(1, 3))
        sigma = [int(v) for v in rng.integers(0, N, size=int(rng.integers(1, 11)))]
        init = tuple(range(k))
        b = belady(k, sigma, init)
        assert b == paging_exhaustive(k, sigma, init)
        assert b == opt_offline(paging_as_lts(k, N), sigma, init)
    assert belady(2, [0, 1, 0, 1], ()) == 2
