import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advicebench.core import InputSequence, expected_cost, run
from advicebench.games import (
    CostMatrix,
    bsg_matrix,
    identity_matrix,
    pure_bounds,
    rmg_advice_alg,
    rmg_hard_distribution,
    rmg_problem,
    rmg_random_alg,
    sgkh_matrix,
    solve_game,
)


def _certs(A, sol):
    arr = A.array()
    nu = np.array([sol.col_strategy.as_dict().get(j, 0.0) for j in range(A.q)])
    mu = np.array([sol.row_strategy.as_dict().get(i, 0.0) for i in range(A.q)])
    return (arr @ nu).max(), (mu @ arr).min()


def test_known_values():
    sol = solve_game(sgkh_matrix(3))
    assert sol.value == pytest.approx(2 / 3)
    assert sol.col_strategy.probs == pytest.approx((1 / 3,) * 3)
    assert sol.row_strategy.probs == pytest.approx((1 / 3,) * 3)
    assert solve_game(identity_matrix(3)).value == pytest.approx(1 / 3)
    sol = solve_game(bsg_matrix(1, 2))
    assert sol.value == pytest.approx(2 / 3)
    assert sol.col_strategy.probs == pytest.approx((1 / 3, 2 / 3))
    ex = solve_game(bsg_matrix(1, 2), exact=True)
    assert ex.exact_value == Fraction(2, 3)


def test_duality_gap_random_matrices():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        q = int(rng.integers(1, 9))
        A = CostMatrix(rng.random((q, q)).tolist())
        sol = solve_game(A)
        hi, lo = _certs(A, sol)
        assert abs(hi - lo) <= 1e-9
        assert lo - 1e-9 <= sol.value <= hi + 1e-9


@given(st.integers(2, 5), st.floats(min_value=0.1, max_value=10.0), st.integers(0, 10**6))
def test_scaling(q, c, seed):
    A = CostMatrix(np.random.default_rng(seed).random((q, q)).tolist())
    assert solve_game(A.scaled(c)).value == pytest.approx(c * solve_game(A).value, rel=1e-9, abs=1e-9)


@given(st.integers(1, 6), st.integers(0, 10**6))
def test_value_between_pure_bounds(q, seed):
    A = CostMatrix(np.random.default_rng(seed).integers(0, 5, size=(q, q)).tolist())
    lo, hi = pure_bounds(A)
    v = solve_game(A).value
    assert lo - 1e-9 <= v <= hi + 1e-9


@given(st.integers(1, 4), st.integers(0, 10**6))
def test_exact_mode_agrees(q, seed):
    A = CostMatrix(np.random.default_rng(seed).integers(0, 4, size=(q, q)).tolist())
    ex = solve_game(A, exact=True)
    assert float(ex.exact_value) == pytest.approx(solve_game(A).value, abs=1e-9)


def test_matrix_validation_and_json():
    with pytest.raises(ValueError):
        CostMatrix([[0, 1]])
    with pytest.raises(ValueError):
        CostMatrix([[0, -1], [1, 0]])
    A = bsg_matrix(1, 3)
    doc = json.loads(A.to_json())
    assert doc == {"q": 2, "rows": [[0, 1], [3, 0]]}
    assert CostMatrix.from_json(A.to_json()).rows == A.rows
    assert A.inf_norm == 3


def test_advice_alg_examples():
    A = sgkh_matrix(2)
    prob = rmg_problem(A)
    tr = run(prob, rmg_advice_alg(A), InputSequence("s", (0, 0, 0)))
    assert tr.answers == (0, 0, 0) and tr.total == 0
    # ties go to the smallest column
    tr = run(prob, rmg_advice_alg(A), InputSequence("s", (0, 1)))
    assert tr.answers == (0, 0)


def test_hard_distribution_is_optimal_row_strategy():
    d = rmg_hard_distribution(sgkh_matrix(2), 3)
    assert d.rounds == 3
    assert d.per_round[0].probs == pytest.approx((0.5, 0.5))


@given(st.integers(2, 4), st.integers(1, 4))
def test_random_alg_value(q, n):
    A = sgkh_matrix(q)
    est = expected_cost(rmg_problem(A), rmg_random_alg(A), rmg_hard_distribution(A, n))
    assert est.mean == pytest.approx((q - 1) / q * n, abs=1e-9)
