import numpy as np
import pytest
from scipy.optimize import linprog as scipy_linprog

from ensemblelab.errors import LPError
from ensemblelab.lp import linprog


def test_textbook_problem():
    # max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
    res = linprog([-3.0, -5.0], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18])
    assert res.fun == pytest.approx(-36.0, abs=1e-12)
    np.testing.assert_allclose(res.x, [2.0, 6.0], atol=1e-12)


def test_equality_with_redundant_row():
    A = [[1, 1, 1], [2, 2, 2], [1, 0, -1]]
    res = linprog([1.0, 3.0, 1.0], A_eq=A, b_eq=[1, 2, 0])
    np.testing.assert_allclose(res.x, [0.5, 0.0, 0.5], atol=1e-12)
    assert res.max_violation < 1e-12


def test_infeasible_raises():
    with pytest.raises(LPError):
        linprog([1.0, 1.0], A_eq=[[1, 1]], b_eq=[-1.0])


def test_unbounded_raises():
    with pytest.raises(LPError):
        linprog([-1.0, 0.0], A_ub=[[0, 1]], b_ub=[1.0])


def test_degenerate_cycling_example_terminates():
    # Beale's example cycles under the largest-coefficient rule
    c = [-0.75, 150.0, -0.02, 6.0]
    A = [[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]]
    res = linprog(c, A_ub=A, b_ub=[0.0, 0.0, 1.0])
    assert res.fun == pytest.approx(-0.05, abs=1e-12)


def test_agrees_with_highs_on_random_programs(rng):
    checked = 0
    for _ in range(120):
        n = int(rng.integers(2, 9))
        m_eq = int(rng.integers(0, 3))
        m_ub = int(rng.integers(1, 6))
        x0 = rng.uniform(0, 1, n)
        A_eq = rng.normal(size=(m_eq, n))
        A_ub = rng.normal(size=(m_ub, n))
        b_eq = A_eq @ x0
        b_ub = A_ub @ x0 + rng.uniform(0, 1, m_ub)
        # box keeps the program bounded
        A_ub = np.vstack([A_ub, np.eye(n)])
        b_ub = np.concatenate([b_ub, np.full(n, 3.0)])
        c = rng.normal(size=n)
        ref = scipy_linprog(c, A_ub=A_ub, b_ub=b_ub,
                            A_eq=A_eq if m_eq else None, b_eq=b_eq if m_eq else None,
                            method="highs")
        assert ref.status == 0
        res = linprog(c, A_eq=A_eq if m_eq else None, b_eq=b_eq if m_eq else None,
                      A_ub=A_ub, b_ub=b_ub)
        assert res.fun == pytest.approx(ref.fun, abs=1e-8)
        assert res.max_violation < 1e-9
        checked += 1
    assert checked == 120


def test_badly_scaled_rows(rng):
    for _ in range(40):
        n = 6
        x0 = rng.uniform(0, 1, n)
        A = rng.normal(size=(3, n)) * 10.0 ** rng.uniform(-6, 6, size=(3, 1))
        A_ub = np.eye(n)
        c = rng.normal(size=n)
        ref = scipy_linprog(c, A_eq=A, b_eq=A @ x0, A_ub=A_ub, b_ub=np.full(n, 2.0),
                            method="highs")
        res = linprog(c, A_eq=A, b_eq=A @ x0, A_ub=A_ub, b_ub=np.full(n, 2.0))
        assert res.fun == pytest.approx(ref.fun, abs=1e-7)


def test_violation_reported_in_original_units():
    res = linprog([1.0, 1.0], A_eq=[[1e6, 2e6]], b_eq=[3e6])
    assert res.max_violation <= 1e-9 * 3e6
    np.testing.assert_allclose([1e6, 2e6] @ res.x, 3e6, rtol=1e-14)
