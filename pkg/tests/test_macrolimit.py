import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ensemblelab.errors import DimensionMismatch, OrderTooHigh, ZeroVariance
from ensemblelab.macrolimit import (DiscreteDistribution, central_cumulants,
                                    cumulants_from_moments, double_factorial,
                                    gaussian_central_moments, higher_moments_vanish,
                                    iid_moments, lyapunov_check, moments_from_cumulants,
                                    moments_of_sum, qubit_relaxation_change,
                                    subsystem_energy_change)
from ensemblelab.maxent import gibbs_state
from ensemblelab.spectra import DiagonalState, ObservableSet


def _convolve(dists):
    """Exact distribution of the sum by explicit convolution."""
    support, probs = np.zeros(1), np.ones(1)
    for d in dists:
        support = np.add.outer(support, d.support).ravel()
        probs = np.outer(probs, d.probs).ravel()
    return support, probs


def _central_moment_of_mean(dists, n):
    s, p = _convolve(dists)
    x = s / len(dists)
    return float(p @ (x - p @ x) ** n)


def _random_dist(rng, k):
    return DiscreteDistribution(rng.normal(size=k), rng.dirichlet(np.ones(k)))


def test_qubit_relaxation_distribution():
    dist = qubit_relaxation_change([0.9, 0.1], 1.0)
    g = gibbs_state(ObservableSet.from_spectrum([0.0, 1.0]), [1.0]).p
    np.testing.assert_allclose(dist.support, [-1.0, 0.0, 1.0])
    np.testing.assert_allclose(dist.probs, [0.1 * g[0], 0.9 * g[0] + 0.1 * g[1], 0.9 * g[1]],
                               atol=1e-15)


def test_energy_change_mean_is_energy_difference(rng):
    obs = ObservableSet.from_spectrum([0.0, 0.4, 1.5])
    a = DiagonalState(rng.dirichlet(np.ones(3)))
    b = DiagonalState(rng.dirichlet(np.ones(3)))
    dist = subsystem_energy_change(a, b, obs)
    assert dist.mean == pytest.approx(b.p @ obs.h - a.p @ obs.h, abs=1e-14)


def test_energy_change_dimension_check():
    obs = ObservableSet.from_spectrum([0.0, 1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        subsystem_energy_change(DiagonalState([0.5, 0.5]), DiagonalState([1, 0, 0]), obs)


def test_gaussian_reference_moments():
    np.testing.assert_allclose(gaussian_central_moments(2.0, 8), [2, 0, 12, 0, 120, 0, 1680])
    assert [double_factorial(n) for n in (1, 3, 5, 7)] == [1, 3, 15, 105]


def test_cumulant_moment_round_trip(rng):
    dist = _random_dist(rng, 5)
    raw = np.array([dist.probs @ dist.support ** n for n in range(9)])
    np.testing.assert_allclose(moments_from_cumulants(cumulants_from_moments(raw)), raw,
                               rtol=1e-10, atol=1e-12)


def test_known_cumulants_of_bernoulli():
    q = 0.3
    dist = DiscreteDistribution([0.0, 1.0], [1 - q, q])
    k = central_cumulants(dist, 4)
    np.testing.assert_allclose(k, [0.0, q * (1 - q), q * (1 - q) * (1 - 2 * q),
                                   q * (1 - q) * (1 - 6 * q * (1 - q))], atol=1e-15)


def test_cumulants_add_under_convolution(rng):
    a, b = _random_dist(rng, 3), _random_dist(rng, 4)
    s, p = _convolve([a, b])
    both = DiscreteDistribution.merged(s, p)
    np.testing.assert_allclose(central_cumulants(both, 6),
                               central_cumulants(a, 6) + central_cumulants(b, 6), atol=1e-12)


def test_moments_match_convolution_for_small_n(rng):
    for N in range(1, 7):
        dists = [_random_dist(rng, 3) for _ in range(N)]
        rep = moments_of_sum(dists, max_order=6)
        for n in range(2, 7):
            assert rep.moment(n) == pytest.approx(_central_moment_of_mean(dists, n),
                                                  rel=1e-9, abs=1e-14)


def test_iid_matches_list_version(rng):
    dist = _random_dist(rng, 4)
    a = iid_moments(dist, 5, max_order=6)
    b = moments_of_sum([dist] * 5, max_order=6)
    np.testing.assert_allclose(a.central_moments_of_mean, b.central_moments_of_mean, rtol=1e-12)
    assert a.lyapunov_ratio == pytest.approx(b.lyapunov_ratio, rel=1e-12)


def test_variance_scales_exactly():
    dist = qubit_relaxation_change([0.9, 0.1], 0.5)
    var = dist.central_moment(2)
    for N in (16, 64, 256):
        assert iid_moments(dist, N).moment(2) == pytest.approx(var / N, rel=1e-14)


def test_lyapunov_ratio_decays_as_inverse_square_root():
    dist = qubit_relaxation_change([0.9, 0.1], 0.5)
    r = [iid_moments(dist, N).lyapunov_ratio for N in (16, 64, 256)]
    assert r[1] / r[0] == pytest.approx(0.5, rel=1e-12)
    assert r[2] / r[1] == pytest.approx(0.5, rel=1e-12)


def test_lyapunov_non_identical(rng):
    dists = [_random_dist(rng, 3) for _ in range(4)]
    s2 = sum(d.central_moment(2) for d in dists)
    num = sum(d.absolute_central_moment(3) for d in dists)
    assert lyapunov_check(dists) == pytest.approx(num / s2 ** 1.5, rel=1e-14)


def test_fourth_moment_approaches_gaussian():
    dist = qubit_relaxation_change([0.9, 0.1], 0.5)
    rows = higher_moments_vanish(dist, [4, 16, 64, 256], 4)
    ratios = [r["moment"] / r["gaussian"] for r in rows]
    assert abs(ratios[-1] - 1) < 0.02
    assert all(abs(b - 1) <= abs(a - 1) for a, b in zip(ratios, ratios[1:]))


def test_zero_variance_handling():
    point = DiscreteDistribution([0.5], [1.0])
    with pytest.raises(ZeroVariance):
        lyapunov_check([point, point])
    rep = moments_of_sum([point] * 3)
    assert np.isnan(rep.lyapunov_ratio)
    assert rep.moment(2) == 0.0


def test_order_limits():
    dist = DiscreteDistribution([0.0, 1.0], [0.5, 0.5])
    with pytest.raises(OrderTooHigh):
        iid_moments(dist, 10, max_order=9)
    with pytest.raises(ValueError):
        higher_moments_vanish(dist, [4], 3)


def test_merged_pools_close_points():
    dist = DiscreteDistribution.merged([0.0, 1e-14, 1.0], [0.25, 0.25, 0.5])
    np.testing.assert_allclose(dist.probs, [0.5, 0.5])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=5),
       st.lists(st.floats(0.05, 1.0), min_size=5, max_size=5),
       st.integers(1, 50))
def test_odd_gaussian_moments_vanish_and_even_scale(xs, ws, N):
    k = len(xs)
    p = np.array(ws[:k]) / np.sum(ws[:k])
    dist = DiscreteDistribution(xs, p)
    rep = iid_moments(dist, N, max_order=6)
    assert rep.gaussian(3) == 0.0 and rep.gaussian(5) == 0.0
    assert rep.moment(2) == pytest.approx(dist.central_moment(2) / N, rel=1e-9, abs=1e-15)
