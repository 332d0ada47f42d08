import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advicebench.core import DeterministicAlgorithm, InputSequence, run
from advicebench.guessing import (
    AntiCoveringCode,
    GuessInstance,
    HSGGInstance,
    all_words,
    anticover_alg,
    anticover_radius,
    build_anticover,
    first_fit_alg,
    guessing_problem,
    hsgg_check_output,
    hsgg_feasible,
    hsgg_hard_distribution,
    hsgg_opt,
    hsgg_simulate,
    pair_cost,
    random_hsgg_instance,
    replay_alg,
    replay_x_alg,
    sg_simulate,
)
from advicebench.oracle import enumerate_algorithms

EXAMPLE = HSGGInstance(4, [(1, 2), (1, 2), (3, 4), (3, 4)], (1, 2, 3, 4))


def test_simulate_examples():
    x = (2, 0, 1, 1)
    assert sg_simulate(replay_alg(x), GuessInstance(3, x)) == 0
    # anti, q=3: answer (previous character + 1) mod 3, which collides only by accident
    evader = DeterministicAlgorithm(lambda h, v, a="": (h[1][-1] + 1) % 3 if h[1] else 0, "evader")
    assert sg_simulate(evader, GuessInstance(3, (1, 1, 1), "anti")) == 0
    assert sg_simulate(evader, GuessInstance(3, (0, 1, 2), "anti")) == 3
    zero = DeterministicAlgorithm.constant(0)
    assert sg_simulate(zero, GuessInstance(2, (0, 1), "bsg", 1, 2)) == 2
    with pytest.raises(ValueError):
        GuessInstance(2, (0, 2))
    with pytest.raises(ValueError):
        GuessInstance(2, (0, 1), "bsg", 2, 1)


@given(st.integers(1, 3))
def test_sgkh_anti_equivalence_binary(n):
    sg, anti = guessing_problem("sgkh", 2), guessing_problem("anti", 2)
    for alg in enumerate_algorithms(sg, n, "s"):
        flipped = DeterministicAlgorithm(lambda h, v, a="", f=alg.decide: 1 - f(h, v, a))
        for x in itertools.product((0, 1), repeat=n):
            inp = InputSequence("s", x)
            assert run(sg, alg, inp).total == run(anti, flipped, inp).total


def test_all_words():
    w = all_words(2, 3)
    assert w.shape == (8, 3)
    assert w[5].tolist() == [1, 0, 1]


def test_anticover_small_cases():
    assert anticover_radius(1, 0.3) == 1
    code = AntiCoveringCode(2, 1, 1, np.array([[0], [1]], dtype=np.uint8))
    assert code.verify()
    assert not AntiCoveringCode(2, 1, 1, np.array([[0]], dtype=np.uint8)).verify()
    code = build_anticover(2, 8, 0.2, seed=3)
    assert code.verify() and code.radius == 7


def test_anticover_text_roundtrip_and_replay():
    code = build_anticover(2, 8, 0.3, seed=1)
    back = AntiCoveringCode.from_text(code.to_text(), 2, code.radius)
    assert np.array_equal(back.codewords, code.codewords) and back.verify()
    lines = code.to_text().split()
    assert lines == sorted(lines)
    alg = anticover_alg(code)
    prob = guessing_problem("anti", 2)
    for w in all_words(2, 8)[::7]:
        assert run(prob, alg, InputSequence("s", tuple(int(v) for v in w))).total <= 2


def test_anticover_q3():
    code = build_anticover(3, 5, 0.2, seed=2)
    assert code.verify()
    assert code.radius == 4


def test_hsgg_worked_example():
    y = (1, 1, 3, 3)
    hsgg_check_output(y, EXAMPLE)
    assert len(set(y)) == 2
    assert hsgg_opt(EXAMPLE)[0] == 2
    with pytest.raises(ValueError, match="infeasible"):
        hsgg_check_output((1, 1, 1, 1), EXAMPLE)


def test_hsgg_instance_validation():
    with pytest.raises(ValueError):
        HSGGInstance(3, [(1,), (2,), (3,)], (1, 2, 3))
    with pytest.raises(ValueError):
        HSGGInstance(2, [(1,), (2,)], (2, 2))


@given(st.sampled_from([2, 4, 6]), st.integers(0, 10**6))
def test_hsgg_properties(k, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(k, 13))
    inst = random_hsgg_instance(n, k, rng)
    cost, y = hsgg_simulate(replay_x_alg(k), inst)
    assert y == inst.x and cost <= k
    cost, y = hsgg_simulate(first_fit_alg(), inst)
    hsgg_check_output(y, inst)
    assert cost >= pair_cost(y, inst) / (k / 2)
    # a label never used before is always feasible
    for i in range(n):
        hist = ("s", inst.input().requests[:i], y[:i])
        assert hsgg_feasible(max(y[:i], default=0) + 1, hist, inst.A[i])


def test_hsgg_opt_small():
    rng = np.random.default_rng(5)
    for _ in range(20):
        inst = random_hsgg_instance(6, 4, rng)
        opt, y = hsgg_opt(inst)
        hsgg_check_output(y, inst)
        assert opt == len(set(y)) <= hsgg_simulate(first_fit_alg(), inst)[0]


def test_hsgg_hard_distribution():
    d = hsgg_hard_distribution(4, 4)
    assert d.per_round[0].probs == pytest.approx((1 / 12,) * 12)
    inp, p = next(iter(d.enumerate(cap=10**7)))
    assert inp.n == 4
    with pytest.raises(ValueError):
        hsgg_hard_distribution(2, 4)
