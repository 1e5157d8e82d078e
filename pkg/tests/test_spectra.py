import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ensemblelab.errors import (DimensionMismatch, InfeasibleMacrostate,
                                InvalidState, SingletonClassWarning)
from ensemblelab.spectra import (DiagonalState, HermitianState, Macrostate,
                                 ObservableSet, dephase, equivalence_class_dim,
                                 expectation, is_compatible, pinch,
                                 sample_compatible, shannon_entropy)

from conftest import random_interior_state


def test_expectation_example(qutrit):
    assert expectation(DiagonalState([0.25, 0.25, 0.5]), qutrit)[0] == pytest.approx(1.25)


def test_expectation_rejects_dimension_mismatch(qutrit):
    with pytest.raises(DimensionMismatch):
        expectation(DiagonalState([0.5, 0.5]), qutrit)


def test_entropy_example():
    s = shannon_entropy(DiagonalState([0.5, 0.25, 0.25]))
    assert s == pytest.approx(1.5 * np.log(2), abs=1e-15)


def test_entropy_ignores_zero_populations():
    assert shannon_entropy(DiagonalState([1.0, 0.0, 0.0])) == 0.0


@pytest.mark.parametrize("p", [[0.5, 0.6], [1.2, -0.2], [np.nan, 1.0]])
def test_invalid_populations_rejected(p):
    with pytest.raises(InvalidState):
        DiagonalState(p)


def test_from_spectrum_sorts_and_records_order():
    obs = ObservableSet.from_spectrum([2.0, 0.0, 1.0])
    np.testing.assert_array_equal(obs.h, [0.0, 1.0, 2.0])
    np.testing.assert_array_equal(obs.order, [1, 2, 0])


def test_observable_dict_round_trip():
    obs = ObservableSet(np.array([[0.0, 1.0, 2.0, 3.0], [1.0, -1.0, 1.0, -1.0]]))
    back = ObservableSet.from_dict(obs.to_dict())
    np.testing.assert_array_equal(back.eigenvalues, obs.eigenvalues)


def test_is_compatible_tolerance(qutrit):
    m = Macrostate(qutrit, [1.0])
    assert is_compatible(DiagonalState([0.3, 0.4, 0.3]), m)
    assert not is_compatible(DiagonalState([0.3, 0.4 - 1e-6, 0.3 + 1e-6]), m)
    with pytest.raises(ValueError):
        is_compatible(DiagonalState([0.3, 0.4, 0.3]), m, tol=0.0)


def test_class_dimension_generic_single_observable():
    obs = ObservableSet.from_spectrum([0.0, 1.0, 2.5, 4.0])
    assert equivalence_class_dim(Macrostate(obs, [1.7])) == 2


def test_class_dimension_at_spectral_edge_is_zero(qutrit):
    assert equivalence_class_dim(Macrostate(qutrit, [0.0])) == 0


def test_class_dimension_qubit_is_zero():
    obs = ObservableSet.from_spectrum([0.0, 1.0])
    assert equivalence_class_dim(Macrostate(obs, [0.1])) == 0


def test_infeasible_macrostate(qutrit):
    with pytest.raises(InfeasibleMacrostate):
        equivalence_class_dim(Macrostate(qutrit, [2.5]))


def test_class_dimension_matches_rank_formula(rng):
    # interior macrostates: d - 1 - rank of the centred observable table
    for _ in range(30):
        d = int(rng.integers(3, 8))
        n = int(rng.integers(1, 3))
        q = rng.integers(-2, 3, size=(n, d)).astype(float)
        obs = ObservableSet(q)
        v = q @ random_interior_state(rng, d)
        expected = d - 1 - np.linalg.matrix_rank(q - q.mean(axis=1, keepdims=True))
        assert equivalence_class_dim(Macrostate(obs, v)) == expected


def test_samples_are_compatible_and_distinct(qutrit):
    m = Macrostate(qutrit, [0.8])
    states = sample_compatible(m, 200, seed=3)
    assert len(states) == 200
    assert all(is_compatible(s, m) for s in states)
    assert all(s.p.min() >= 0 for s in states)
    assert len({s.p[0] for s in states}) > 150


def test_samples_reproducible(qutrit):
    m = Macrostate(qutrit, [1.3])
    a = sample_compatible(m, 20, seed=11)
    b = sample_compatible(m, 20, seed=11)
    assert all(np.array_equal(x.p, y.p) for x, y in zip(a, b))


def test_samples_on_boundary_face():
    # first mean at its maximum confines the class to levels 2..4
    obs = ObservableSet(np.array([[0.0, 0.0, 1.0, 1.0, 1.0],
                                  [0.0, 1.0, 0.0, 1.0, 2.0]]))
    m = Macrostate(obs, [1.0, 1.0])
    assert equivalence_class_dim(m) == 1
    states = sample_compatible(m, 30, seed=0)
    assert len({s.p[2] for s in states}) > 20
    for s in states:
        assert s.p[0] == 0.0 and s.p[1] == 0.0
        assert is_compatible(s, m)


def test_singleton_class_warns():
    obs = ObservableSet.from_spectrum([0.0, 1.0])
    m = Macrostate(obs, [0.3])
    with pytest.warns(SingletonClassWarning):
        states = sample_compatible(m, 5, seed=0)
    assert len(states) == 1
    np.testing.assert_allclose(states[0].p, [0.7, 0.3], atol=1e-12)


def test_fallback_path_still_compatible():
    # a thin class where nearly every Dirichlet draw is rejected
    obs = ObservableSet.from_spectrum(np.arange(8.0))
    m = Macrostate(obs, [0.05])
    from ensemblelab.config import ToleranceConfig
    states = sample_compatible(m, 10, seed=1, tol=ToleranceConfig(sample_retries=1))
    assert all(is_compatible(s, m) and s.p.min() >= 0 for s in states)


def _random_density(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def test_hermitian_state_validation():
    with pytest.raises(InvalidState):
        HermitianState(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(InvalidState):
        HermitianState(np.diag([1.5, -0.5]))


def test_dephase_keeps_diagonal_and_expectations(rng):
    obs = ObservableSet.from_spectrum([0.0, 1.0, 1.0, 3.0])
    for _ in range(20):
        rho = _random_density(rng, 4)
        state = dephase(rho, obs)
        np.testing.assert_allclose(state.p, np.real(np.diag(rho)), atol=1e-14)
        assert expectation(state, obs)[0] == pytest.approx(
            np.real(np.trace(rho @ np.diag(obs.h))), abs=1e-12)


def test_pinch_is_idempotent_and_keeps_degenerate_blocks(rng):
    obs = ObservableSet.from_spectrum([0.0, 1.0, 1.0, 3.0])
    rho = _random_density(rng, 4)
    once = pinch(rho, obs)
    np.testing.assert_allclose(pinch(once, obs), once, atol=1e-15)
    assert abs(once[1, 2]) > 0
    assert once[0, 1] == 0 and once[2, 3] == 0


def test_pinch_matches_long_time_average(rng):
    # integer spectrum: averaging over one full period is exact
    h = np.array([0.0, 1.0, 1.0, 3.0])
    obs = ObservableSet.from_spectrum(h)
    rho = _random_density(rng, 4)
    ts = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    avg = np.zeros_like(rho)
    for t in ts:
        u = np.exp(-1j * h * t)
        avg += (u[:, None] * rho * u.conj()[None, :]) / ts.size
    np.testing.assert_allclose(pinch(rho, obs), avg, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8))
def test_entropy_bounded_by_log_dimension(w):
    p = np.array(w) / np.sum(w)
    s = shannon_entropy(DiagonalState.normalized(p))
    assert -1e-15 <= s <= np.log(len(w)) + 1e-12


def test_samples_warn_free_for_generic_class(qutrit):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sample_compatible(Macrostate(qutrit, [1.0]), 3, seed=0)
