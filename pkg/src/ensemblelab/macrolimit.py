"""Energy-change statistics of many independent subsystems.

Moments of the total change ``X = sum_i X_i`` are assembled from cumulants,
which add over independent summands; explicit convolution is left to tests.
"""

from dataclasses import dataclass
from math import comb, prod

import numpy as np

from .errors import DimensionMismatch, OrderTooHigh, ZeroVariance
from .maxent import gibbs_state
from .spectra import DiagonalState, ObservableSet

MAX_ORDER = 8


@dataclass(frozen=True)
class DiscreteDistribution:
    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.support, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if x.shape != p.shape or x.size == 0:
            raise ValueError("support and probabilities must have equal nonzero length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise ValueError("distribution entries must be finite")
        if p.min() < 0 or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "support", x)
        object.__setattr__(self, "probs", p)

    @classmethod
    def merged(cls, support, probs, atol=1e-12):
        """Build a distribution, pooling support points closer than ``atol``."""
        x = np.asarray(support, dtype=float).ravel()
        p = np.asarray(probs, dtype=float).ravel()
        order = np.argsort(x, kind="stable")
        x, p = x[order], p[order]
        xs, ps = [], []
        for xi, pi in zip(x, p):
            if xs and abs(xi - xs[-1]) <= atol * max(1.0, abs(xi)):
                ps[-1] += pi
            else:
                xs.append(xi)
                ps.append(pi)
        ps = np.array(ps)
        return cls(np.array(xs), ps / ps.sum())

    @property
    def mean(self):
        return float(self.probs @ self.support)

    def central_moment(self, n):
        return float(self.probs @ (self.support - self.mean) ** n)

    def absolute_central_moment(self, r, scale=1.0):
        """``E|X - mu|^r / scale^r``; dividing first avoids underflow."""
        return float(self.probs @ (np.abs(self.support - self.mean) / scale) ** r)


@dataclass(frozen=True)
class MomentReport:
    n_subsystems: int
    central_moments_of_mean: np.ndarray   # mu_n(X/N) for n = 2..max_order
    gaussian_reference: np.ndarray
    lyapunov_ratio: float

    def moment(self, n):
        return float(self.central_moments_of_mean[n - 2])

    def gaussian(self, n):
        return float(self.gaussian_reference[n - 2])


def subsystem_energy_change(initial, final, obs):
    """Distribution of ``h_b - h_a`` for independent draws a ~ initial, b ~ final."""
    if initial.d != obs.d or final.d != obs.d:
        raise DimensionMismatch("states and spectrum differ in dimension")
    h = obs.h
    support = np.subtract.outer(h, h).T.ravel()   # [a, b] -> h_b - h_a
    probs = np.outer(initial.p, final.p).ravel()
    keep = probs > 0
    return DiscreteDistribution.merged(support[keep], probs[keep])


def cumulants_from_moments(m):
    """Cumulants ``k_1..k_K`` from raw moments ``m_0..m_K`` (``m_0 = 1``)."""
    K = len(m) - 1
    k = np.zeros(K + 1)
    for n in range(1, K + 1):
        k[n] = m[n] - sum(comb(n - 1, j - 1) * k[j] * m[n - j] for j in range(1, n))
    return k[1:]


def moments_from_cumulants(k):
    """Raw moments ``m_0..m_K`` from cumulants ``k_1..k_K``."""
    K = len(k)
    kk = np.concatenate([[0.0], k])
    m = np.zeros(K + 1)
    m[0] = 1.0
    for n in range(1, K + 1):
        m[n] = sum(comb(n - 1, j - 1) * kk[j] * m[n - j] for j in range(1, n + 1))
    return m


def central_cumulants(dist, max_order):
    """Cumulants of ``X - E[X]``; the first is zero."""
    x = dist.support - dist.mean
    raw = np.array([dist.probs @ x ** n for n in range(max_order + 1)])
    k = cumulants_from_moments(raw)
    k[0] = 0.0
    return k


def double_factorial(n):
    return prod(range(n, 0, -2)) if n > 0 else 1


def gaussian_central_moments(variance, max_order):
    """``mu_n`` of a normal variable for n = 2..max_order."""
    out = []
    for n in range(2, max_order + 1):
        out.append(0.0 if n % 2 else variance ** (n // 2) * double_factorial(n - 1))
    return np.array(out)


def _check_order(max_order):
    if max_order > MAX_ORDER:
        raise OrderTooHigh(f"orders above {MAX_ORDER} are not supported")
    if max_order < 2:
        raise ValueError("max_order must be >= 2")


def _report(total_cumulants, N, lyap):
    max_order = total_cumulants.size
    mu = moments_from_cumulants(total_cumulants)
    of_mean = np.array([mu[n] / float(N) ** n for n in range(2, max_order + 1)])
    variance = total_cumulants[1] / float(N) ** 2
    return MomentReport(N, of_mean, gaussian_central_moments(variance, max_order), lyap)


def lyapunov_check(dists, delta=1.0):
    """``sum_i E|X_i - mu_i|^(2+delta) / s_N^(2+delta)`` for the given summands."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    s2 = sum(d.central_moment(2) for d in dists)
    if s2 <= 0:
        raise ZeroVariance("all summands are deterministic")
    s = np.sqrt(s2)
    return sum(d.absolute_central_moment(2 + delta, s) for d in dists)


def moments_of_sum(dists, max_order=4, delta=1.0):
    """Central moments of ``X / N`` with their Gaussian counterparts."""
    _check_order(max_order)
    total = sum(central_cumulants(d, max_order) for d in dists)
    try:
        lyap = lyapunov_check(dists, delta)
    except ZeroVariance:
        lyap = float("nan")
    return _report(total, len(dists), lyap)


def iid_moments(dist, N, max_order=4, delta=1.0):
    """:func:`moments_of_sum` for ``N`` copies of ``dist`` without building the list."""
    _check_order(max_order)
    k = central_cumulants(dist, max_order)
    s2 = N * dist.central_moment(2)
    if s2 > 0:
        lyap = N * dist.absolute_central_moment(2 + delta, np.sqrt(s2))
    else:
        lyap = float("nan")
    return _report(N * k, N, lyap)


def higher_moments_vanish(dist, n_grid, order):
    """``mu_order(X/N)`` and its Gaussian prediction for each N in ``n_grid``."""
    if order < 2 or order % 2:
        raise ValueError("order must be even and >= 2")
    rows = []
    for N in n_grid:
        rep = iid_moments(dist, int(N), max_order=order)
        rows.append({"N": int(N), "moment": rep.moment(order),
                     "gaussian": rep.gaussian(order)})
    return rows


def qubit_relaxation_change(p_initial, beta, h=(0.0, 1.0)):
    """Energy change of a qubit relaxing from ``p_initial`` to its bath Gibbs state."""
    obs = ObservableSet.from_spectrum(h)
    return subsystem_energy_change(DiagonalState(p_initial),
                                   gibbs_state(obs, [beta]), obs)
