"""Canonical and generalized Gibbs ensembles fitted to mean values.

The multipliers solve the convex dual of entropy maximization,

    minimize  log Z(beta) + beta . v,   Z(beta) = sum_a exp(-beta . q_a),

whose gradient is ``v - <Q>`` and whose Hessian is the covariance matrix of
the observables under the current ensemble.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL
from .errors import (DegenerateSpectrum, LPError, OutOfRange,
                     RankDeficientObservables, ZeroBeta)
from .lp import linprog
from .spectra import DiagonalState, expectation, shannon_entropy

EXP_LIMIT = 700.0
COND_LIMIT = 1e12


@dataclass(frozen=True)
class GibbsSolution:
    beta: np.ndarray
    state: DiagonalState
    residual: float
    iterations: int

    def to_dict(self):
        return {"beta": np.asarray(self.beta).tolist(), "p": self.state.p.tolist(),
                "residual": float(self.residual), "iterations": int(self.iterations)}


def _log_weights(q, beta):
    """Normalized log-populations for charge table ``q`` (n, d)."""
    z = -np.asarray(beta, dtype=float) @ q
    z = z - z.max()
    return z - np.log(np.exp(z).sum())


def _populations(q, beta):
    return np.exp(_log_weights(q, beta))


def log_partition(obs, beta):
    """``log Z(beta)`` evaluated without overflow."""
    z = -np.atleast_1d(np.asarray(beta, dtype=float)) @ obs.eigenvalues
    top = z.max()
    return float(top + np.log(np.exp(z - top).sum()))


def gibbs_state(obs, beta):
    """Ensemble with populations proportional to ``exp(-sum_j beta_j q^j_a)``."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if beta.shape != (obs.n,):
        raise ValueError(f"expected {obs.n} multipliers, got {beta.shape}")
    if not np.all(np.isfinite(beta)):
        raise ValueError("multipliers must be finite")
    return DiagonalState.normalized(_populations(obs.eigenvalues, beta))


def ensemble_moments(q, beta):
    """Populations, mean charges and charge covariance of the ensemble at ``beta``.

    The covariance is the Hessian of ``log Z`` with respect to ``beta``.
    """
    p = _populations(q, beta)
    mean = q @ p
    dev = q - mean[:, None]
    return p, mean, (dev * p) @ dev.T


def thermal_energy(obs, beta):
    """Mean values of all observables in the Gibbs state at ``beta``."""
    return expectation(gibbs_state(obs, beta), obs)


def _spread(q):
    return q.max(axis=1) - q.min(axis=1)


def fit_canonical(obs, e, tol=DEFAULT_TOL):
    """Find the inverse temperature whose Gibbs state has mean energy ``e``.

    Brackets the root (energy is strictly decreasing in beta), then runs a
    Newton iteration safeguarded by bisection.

    Raises
    ------
    DegenerateSpectrum
        If the spectrum has a single distinct eigenvalue.
    OutOfRange
        If ``e`` is not strictly inside the spectral range, or the
        multiplier would exceed the exponent clamp.
    """
    if obs.n != 1:
        raise ValueError("fit_canonical takes a single observable")
    h = obs.h
    q = obs.eigenvalues
    scale = h.max() - h.min()
    if scale <= 0:
        raise DegenerateSpectrum("all eigenvalues are equal")
    e = float(e)
    if not h.min() < e < h.max():
        raise OutOfRange(f"energy {e!r} outside the open interval "
                         f"({float(h.min())!r}, {float(h.max())!r})")
    clamp = EXP_LIMIT / scale

    def moments(b):
        p = _populations(q, [b])
        mean = p @ h
        return mean, p @ (h - mean) ** 2

    lo, hi = -1.0 / scale, 1.0 / scale
    iterations = 0
    while moments(hi)[0] > e:
        lo, hi = hi, 2 * hi
        iterations += 1
        if hi > clamp:
            if moments(clamp)[0] > e:
                raise OutOfRange(f"energy {e!r} needs beta beyond {clamp:.4g}")
            hi = clamp
    while moments(lo)[0] < e:
        hi, lo = lo, 2 * lo
        iterations += 1
        if lo < -clamp:
            if moments(-clamp)[0] < e:
                raise OutOfRange(f"energy {e!r} needs beta below {-clamp:.4g}")
            lo = -clamp

    b = 0.5 * (lo + hi)
    for _ in range(400):
        iterations += 1
        mean, var = moments(b)
        f = mean - e
        if f == 0.0:
            break
        if f > 0:
            lo = b
        else:
            hi = b
        step = b + f / var if var > 0 else np.nan
        b_new = step if lo < step < hi else 0.5 * (lo + hi)
        if b_new == b or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(b)):
            break
        b = b_new
    # the loop may end one step short of the best iterate
    candidates = [b, lo, hi]
    b = min(candidates, key=lambda x: abs(moments(x)[0] - e))
    state = gibbs_state(obs, [b])
    residual = abs(float(state.p @ h) - e)
    return GibbsSolution(np.array([b]), state, residual, iterations)


def _hull_margin(q, v):
    """Largest t such that some p >= t (entrywise) reproduces mean values v."""
    n, d = q.shape
    # variables: p (d), t
    A_eq = np.zeros((n + 1, d + 1))
    A_eq[0, :d] = 1.0
    A_eq[1:, :d] = q
    b_eq = np.concatenate([[1.0], v])
    A_ub = np.hstack([-np.eye(d), np.ones((d, 1))])
    b_ub = np.zeros(d)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    try:
        res = linprog(c, A_eq, b_eq, A_ub, b_ub)
    except LPError:
        return -np.inf
    return -res.fun


def fit_gge(obs, v, tol=DEFAULT_TOL, max_iter=500):
    """Fit a generalized Gibbs ensemble to mean values ``v``.

    Damped Newton on the convex dual with a backtracking line search; falls
    back to a gradient step when the covariance matrix is too ill-conditioned.
    Affinely dependent observables trigger :class:`RankDeficientObservables`
    and the minimum-norm multiplier vector is returned.
    """
    q = obs.eigenvalues
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (obs.n,):
        raise ValueError(f"expected {obs.n} values, got {v.shape}")
    centered = q - q.mean(axis=1, keepdims=True)
    U, S, _ = np.linalg.svd(centered, full_matrices=False)
    if S.max() <= 0:
        raise DegenerateSpectrum("every observable is proportional to the identity")
    r = int((S > 1e-10 * S.max()).sum())
    if r < obs.n:
        warnings.warn(f"observables span only {r} independent directions; "
                      "returning minimum-norm multipliers",
                      RankDeficientObservables, stacklevel=2)
    if _hull_margin(q, v) <= 1e-13:
        raise OutOfRange(f"values {v.tolist()} are not interior to the joint spectrum")

    basis = U[:, :r]
    R = basis.T @ q
    w = basis.T @ v
    charge_scale = max(float(_spread(q).max()), 1e-300)
    target = 1e-3 * tol.fit

    def dual(y):
        z = -y @ R
        top = z.max()
        return top + np.log(np.exp(z - top).sum()) + y @ w

    y = np.zeros(r)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        p, mean, hess = ensemble_moments(R, y)
        grad = w - mean
        if np.abs(q @ p - v).max() <= target:
            break
        if np.linalg.cond(hess) > COND_LIMIT:
            step = -grad / charge_scale ** 2
        else:
            step = -np.linalg.solve(hess, grad)
        f0 = dual(y)
        slope = grad @ step
        t = 1.0
        # in the quadratic regime dual differences fall below float resolution
        while -slope > 1e-12 * max(1.0, abs(f0)) and t > 1e-16:
            if dual(y + t * step) <= f0 + 1e-4 * t * slope:
                break
            t *= 0.5
        y_new = y + t * step
        if np.array_equal(y_new, y):
            break
        y = y_new

    beta = basis @ y
    spread = _spread(q)
    limit = np.where(spread > 0, EXP_LIMIT / np.where(spread > 0, spread, 1.0), np.inf)
    if np.any(np.abs(beta) > limit):
        raise OutOfRange("multipliers exceed the exponent clamp")
    state = gibbs_state(obs, beta)
    residual = float(np.abs(q @ state.p - v).max())
    return GibbsSolution(beta, state, residual, iterations)


def free_energy(state, obs, beta):
    """``<H> - S / beta`` for a single observable."""
    if beta == 0:
        raise ZeroBeta("free energy needs a nonzero beta")
    return float(expectation(state, obs)[0]) - shannon_entropy(state) / beta


def free_entropy(state, obs, beta):
    """``sum_j beta_j <Q^j> - S``."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    return float(beta @ expectation(state, obs)) - shannon_entropy(state)


def gibbs_entropy_macro(m, tol=DEFAULT_TOL):
    """Entropy state function ``beta_S(e) * (e - F(e, H))`` of a macrostate.

    Equals the Shannon entropy of the canonical ensemble fitted to ``e``.
    """
    sol = fit_canonical(m.observables, m.e, tol)
    b = float(sol.beta[0])
    if b == 0.0:
        return shannon_entropy(sol.state)
    return b * (m.e - free_energy(sol.state, m.observables, b))
