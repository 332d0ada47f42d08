import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advicebench.config import CapExceeded
from advicebench.core import (
    AdviceAlgorithm,
    DeterministicAlgorithm,
    InputSequence,
    RandomizedAlgorithm,
    RoundDistribution,
    cost_of,
    derandomize_max,
    derandomize_max_size,
    derandomize_min,
    derandomize_min_size,
    expected_cost,
    iid_rounds,
    repeat_concat,
    run,
    self_delimiting_decode,
    self_delimiting_encode,
    split_advice,
    split_marked,
    trial_rng,
)
from advicebench.games import identity_matrix, rmg_advice_alg, rmg_problem, sgkh_matrix
from advicebench.guessing import guessing_problem, replay_alg, uniform_hard_distribution
from advicebench.infotheory import FiniteDistribution
from advicebench.oracle import enumerate_algorithms

SG2 = guessing_problem("sgkh", 2)


def test_run_examples():
    zero = DeterministicAlgorithm.constant(0)
    assert run(SG2, zero, InputSequence("s", (0, 0))).total == 0
    assert run(SG2, zero, InputSequence("s", (1, 1))).total == 2
    one = DeterministicAlgorithm.constant(1)
    assert run(rmg_problem(identity_matrix(2)), one, InputSequence("s", (1, 1, 1))).total == 3


def test_run_rejects_invalid_answer_and_bad_advice():
    bad = DeterministicAlgorithm.constant(7)
    with pytest.raises(ValueError, match="step 0"):
        run(SG2, bad, InputSequence("s", (0,)))
    adv = rmg_advice_alg(sgkh_matrix(2))
    with pytest.raises(ValueError):
        run(rmg_problem(sgkh_matrix(2)), adv, InputSequence("s", (0,)), advice="01")
    broken = AdviceAlgorithm(lambda n: 2, lambda inp: "0", DeterministicAlgorithm.constant(0))
    with pytest.raises(ValueError):
        broken.advice_for(InputSequence("s", (0,)))


def test_validate_and_inputs():
    SG2.validate(InputSequence("s", (0, 1)))
    with pytest.raises(ValueError):
        SG2.validate(InputSequence("s", (0, 2)))
    assert len(SG2.inputs(3)) == 8
    with pytest.raises(CapExceeded):
        SG2.inputs(5, cap=10)


def test_input_json_roundtrip():
    inp = InputSequence("s", (0, 1, 1))
    assert InputSequence.from_json(inp.to_json("sg")) == inp


def test_expected_cost_examples():
    uni = RandomizedAlgorithm.mixture([(DeterministicAlgorithm.constant(0), 0.5),
                                       (DeterministicAlgorithm.constant(1), 0.5)])
    dist = uniform_hard_distribution(2, 4)
    assert expected_cost(SG2, uni, dist).mean == pytest.approx(2.0)
    best = min(expected_cost(SG2, a, uniform_hard_distribution(2, 1)).mean
               for a in enumerate_algorithms(SG2, 1, "s"))
    assert best == pytest.approx(0.5)


def test_exact_matches_monte_carlo():
    rng = np.random.default_rng(3)
    algs = list(enumerate_algorithms(SG2, 3, "s"))
    w = rng.dirichlet(np.ones(len(algs)))
    rand = RandomizedAlgorithm.mixture(list(zip(algs, w.tolist())))
    per = FiniteDistribution({0: 0.3, 1: 0.7})
    dist = iid_rounds("s", per, 3)
    ex = expected_cost(SG2, rand, dist, "exact").mean
    mc = expected_cost(SG2, rand, dist, "monte_carlo", trials=10_000, seed=11)
    assert abs(ex - mc.mean) <= 4 * mc.stderr


def test_monte_carlo_reproducible():
    dist = uniform_hard_distribution(2, 5)
    alg = DeterministicAlgorithm.constant(0)
    a = expected_cost(SG2, alg, dist, "monte_carlo", trials=300, seed=5)
    b = expected_cost(SG2, alg, dist, "monte_carlo", trials=300, seed=5)
    assert a == b
    assert trial_rng(1, 2).random() == trial_rng(1, 2).random()
    assert trial_rng(1, 2).random() != trial_rng(1, 3).random()


def test_round_distribution_marginals():
    per = [FiniteDistribution({0: 0.2, 1: 0.8}), FiniteDistribution({0: 0.5, 1: 0.25, 2: 0.25}),
           FiniteDistribution({(1, 1): 0.4, (0, 2): 0.6})]
    dist = RoundDistribution("s", per)
    trials = 20_000
    counts = [Counter() for _ in per]
    for i in range(trials):
        for j, block in enumerate(dist.sample_blocks(trial_rng(9, i))):
            counts[j][block] += 1
    for j, d in enumerate(per):
        l1 = sum(abs(counts[j][o] / trials - p) for o, p in d.items())
        assert l1 <= 4 / math.sqrt(trials)
    # tuple outcomes are blocks of several requests
    lengths = {inp.n for inp, _ in dist.enumerate()}
    assert lengths == {4}
    assert sum(p for _, p in dist.enumerate()) == pytest.approx(1.0)


def test_enumerate_cap():
    with pytest.raises(CapExceeded):
        list(uniform_hard_distribution(2, 12).enumerate(cap=100))


@given(st.integers(0, 3))
def test_split_advice_min_equality(n):
    A = sgkh_matrix(3)
    prob = rmg_problem(A)
    adv = rmg_advice_alg(A)
    members = split_advice(adv, n)
    assert len(members) == 2 ** adv.advice_length(n)
    for x in itertools.product(range(3), repeat=n):
        inp = InputSequence("s", x)
        assert run(prob, adv, inp).total == min(run(prob, m, inp).total for m in members)


def test_split_advice_examples():
    assert len(split_advice(AdviceAlgorithm(lambda n: 0, lambda i: "", DeterministicAlgorithm.constant(0)), 3)) == 1
    members = split_advice(rmg_advice_alg(sgkh_matrix(4)), 2)
    assert len(members) == 4
    answers = sorted(m.decide(("s", (), ()), None, "") for m in members)
    assert answers == [0, 1, 2, 3]


def test_with_best_oracle():
    body = DeterministicAlgorithm(lambda h, v, a: int(a[len(h[1])]), "replay-advice")
    alg = AdviceAlgorithm.with_best_oracle(SG2, body, lambda n: n)
    for x in itertools.product((0, 1), repeat=3):
        assert run(SG2, alg, InputSequence("s", x)).total == 0


def test_self_delimiting_lengths():
    assert len(self_delimiting_encode(1)) == 3
    assert len(self_delimiting_encode(5)) == 7
    with pytest.raises(ValueError):
        self_delimiting_decode("0")
    with pytest.raises(ValueError):
        self_delimiting_decode("1101")


@given(st.integers(1, 10**9), st.text(alphabet="01", max_size=8))
def test_self_delimiting_roundtrip(n, tail):
    bits = self_delimiting_encode(n)
    assert len(bits) == 2 * math.ceil(math.log2(n + 1)) + 1
    assert self_delimiting_decode(bits + tail) == (n, tail)


def test_repeat_concat():
    a, b = InputSequence("s", (0, 1)), InputSequence("s", (1, 1))
    assert repeat_concat([a]) == a
    assert repeat_concat([a, b]).requests == (0, 1, 1, 1)
    marked = repeat_concat([a, b], "marked")
    assert split_marked(marked) == [a, b]
    with pytest.raises(ValueError):
        repeat_concat([a, InputSequence("t", (0,))])


def test_derandomize_sizes():
    assert derandomize_min_size(1024, 1.0) == 11  # ratio exactly 10
    assert derandomize_min_size(1, 0.3) == 1
    assert derandomize_max_size(1, 2.0, 0.5) == 1
    for I in (2, 5, 17, 1000):
        assert derandomize_max_size(I, 1.0, 0.5) == math.floor(math.log2(I)) + 1


def test_derandomize_min_post_verified():
    algs = list(enumerate_algorithms(SG2, 2, "s"))
    rand = RandomizedAlgorithm.mixture([(a, 1 / len(algs)) for a in algs])
    inputs = SG2.inputs(2)
    for eps in (0.5, 1.0, 2.0):
        rep = derandomize_min(SG2, rand, inputs, eps, seed=4)
        for inp in inputs:
            best = min(cost_of(SG2, m, inp) for m in rep.members)
            assert best <= (1 + eps) * cost_of(SG2, rand, inp) + 1e-12
            assert run(SG2, rep.algorithm, inp).total == best
        assert rep.algorithm.advice_length(2) == math.ceil(math.log2(rep.t))


def test_derandomize_min_exhausted():
    # the sampler never varies, so the all-ones input is never covered
    rand = RandomizedAlgorithm(draw_fn=lambda rng: DeterministicAlgorithm.constant(0),
                               exact=lambda inp: inp.n / 2)
    with pytest.raises(RuntimeError, match="ratios"):
        derandomize_min(SG2, rand, SG2.inputs(1), 0.5, max_retries=3)


def test_derandomize_max():
    from advicebench.core import OnlineProblem

    prof = OnlineProblem("profit", ("s",), lambda s, p: (0, 1), lambda h, v: (0, 1),
                         lambda h, x, y: 1.0 if x == y else 0.0, objective="max")
    rand = RandomizedAlgorithm.mixture([(DeterministicAlgorithm.constant(0), 0.5),
                                        (DeterministicAlgorithm.constant(1), 0.5)])
    inputs = prof.inputs(2)
    rep = derandomize_max(prof, rand, inputs, 2.0, 0.5, opt=lambda inp: inp.n, seed=2)
    for inp in inputs:
        assert max(cost_of(prof, m, inp) for m in rep.members) >= 0.5 * cost_of(prof, rand, inp)
    with pytest.raises(ValueError, match="strict ratio"):
        derandomize_max(prof, rand, inputs, 1.0, 0.5, opt=lambda inp: inp.n)


def test_mixture_rejects_bad_probabilities():
    with pytest.raises(ValueError):
        RandomizedAlgorithm.mixture([(DeterministicAlgorithm.constant(0), 0.7)])


def test_replay_is_perfect():
    x = (1, 0, 1, 1)
    assert run(SG2, replay_alg(x), InputSequence("s", x)).total == 0
