"""Reachable energies under Gibbs-preserving maps on diagonal states.

A Gibbs-preserving (GP) map acts on populations as a column-stochastic
matrix ``M`` with ``M @ gamma = gamma``. A *macrostate* GP-map must also send
each equivalence class ``[e]_H`` into a single class, which holds iff ``M``
keeps the N-space (traceless diagonal vectors orthogonal to ``h``) inside
itself. Both families of maps are explored with the linear programs here.
"""

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionTooSmall, IllConditionedLP, LPError,
                     SingletonClass, TrivialHamiltonian, ZeroBeta, ZeroHamiltonian)
from .lp import linprog
from .maxent import fit_canonical, gibbs_state, thermal_energy
from .spectra import Macrostate, equivalence_class_dim, expectation

# below this ratio of smallest to largest Gibbs weight the LP loses accuracy
GIBBS_RATIO_LIMIT = 1e-7


@dataclass(frozen=True)
class NSpaceBasis:
    basis: tuple

    @property
    def count(self):
        return len(self.basis)

    def as_array(self):
        return np.array(self.basis).reshape(len(self.basis), -1)


@dataclass(frozen=True)
class StochasticMap:
    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("stochastic map must be a square matrix")
        if M.min() < -1e-12:
            raise ValueError(f"negative entry {M.min():.3e}")
        if np.abs(M.sum(axis=0) - 1.0).max() > 1e-10:
            raise ValueError("columns must sum to 1")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    def apply(self, p):
        return self.M @ np.asarray(p)


@dataclass(frozen=True)
class GPConstants:
    f_const: float
    k_const: float
    lp_status: dict = field(default_factory=dict)


def _require_nontrivial(h):
    if np.ptp(h) <= 0:
        if np.all(h == 0):
            raise ZeroHamiltonian("H is zero")
        raise TrivialHamiltonian("H is proportional to the identity")


def nspace_basis(obs):
    """Orthonormal basis of the traceless diagonal vectors orthogonal to ``h``."""
    h = obs.h
    d = h.size
    _require_nontrivial(h)
    if d < 3:
        raise DimensionTooSmall("the N-space is empty for d = 2")
    frame = [np.ones(d) / np.sqrt(d)]
    hc = h - h.mean()
    frame.append(hc / np.linalg.norm(hc))
    found = []
    for k in range(d):
        v = np.zeros(d)
        v[k] = 1.0
        for _ in range(2):
            for u in frame + found:
                v -= (u @ v) * u
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            found.append(v / norm)
        if len(found) == d - 2:
            break
    return NSpaceBasis(tuple(found))


def t_matrix(obs):
    """The vector ``t = a + b h`` with ``h . t = 0`` and ``sum(t) = sum(h)``."""
    h = obs.h
    d = h.size
    s1, s2 = h.sum(), h @ h
    A = np.array([[s1, s2], [d, s1]])
    if d * s2 - s1 * s1 <= 1e-14 * max(1.0, d * s2):
        raise TrivialHamiltonian("H is proportional to the identity")
    a, b = np.linalg.solve(A, [0.0, s1])
    return a + b * h


def alpha(e, obs, beta):
    """``(e - e_beta(H)) / Tr(H^2)``."""
    h = obs.h
    norm2 = float(h @ h)
    if norm2 == 0:
        raise ZeroHamiltonian("H is zero")
    return (e - float(thermal_energy(obs, [beta])[0])) / norm2


def decompose(state, obs, beta):
    """Split populations as ``gamma_beta + alpha (h - t) + N``.

    Returns ``(alpha, N)`` with ``N`` in the N-space. States in one
    equivalence class share ``alpha`` and differ only in ``N``.
    """
    e = float(expectation(state, obs)[0])
    a = alpha(e, obs, beta)
    gamma = gibbs_state(obs, [beta]).p
    n_part = state.p - gamma - a * (obs.h - t_matrix(obs))
    return a, n_part


def _gp_program(obs, beta, preserve_n):
    """Equality constraints of the GP-map LP in well-scaled variables.

    The unknowns are the flows ``Y[i, j] = M[i, j] * gamma[j]`` (row-major)
    followed by ``u' = M.T @ h - min(h)``. Flows turn the stochastic and
    Gibbs-fixing conditions into 0/1 marginal constraints, and ``u`` carries
    every objective of the form ``h . M x = x . u``. ``M`` keeps the N-space
    inside itself exactly when ``u`` lies in ``span{1, h}``.
    """
    h = obs.h
    d = h.size
    gamma = gibbs_state(obs, [beta]).p
    if gamma.min() < GIBBS_RATIO_LIMIT * gamma.max():
        warnings.warn(f"Gibbs weights span {gamma.max() / max(gamma.min(), 1e-300):.1e}; "
                      "GP-map LP results may be inaccurate", IllConditionedLP, stacklevel=3)
    low = h.min()
    nvar = d * d + d
    rows, rhs = [], []
    for j in range(d):
        r = np.zeros(nvar)
        r[j:d * d:d] = 1.0
        rows.append(r)
        rhs.append(gamma[j])
    for i in range(d):
        r = np.zeros(nvar)
        r[i * d:(i + 1) * d] = 1.0
        rows.append(r)
        rhs.append(gamma[i])
    for j in range(d):
        r = np.zeros(nvar)
        r[j:d * d:d] = h
        r[d * d + j] = -gamma[j]
        rows.append(r)
        rhs.append(gamma[j] * low)
    if preserve_n:
        for v in nspace_basis(obs).basis:
            r = np.zeros(nvar)
            r[d * d:] = v
            rows.append(r)
            rhs.append(0.0)
    return np.array(rows), np.array(rhs), gamma


def _flows_to_map(y, gamma):
    d = gamma.size
    Y = y.reshape(d, d)
    sums = Y.sum(axis=0)
    M = np.eye(d)
    live = sums > 0
    M[:, live] = Y[:, live] / sums[live]
    return StochasticMap(M)


def _solve(obs, beta, objective_vec, preserve_n, sense):
    """Optimize ``h . M x`` over feasible ``M``; returns (value, map, result)."""
    h = obs.h
    d = h.size
    x = np.asarray(objective_vec, dtype=float)
    A, b, gamma = _gp_program(obs, beta, preserve_n)
    c = np.concatenate([np.zeros(d * d), x])
    res = linprog(sense * c, A_eq=A, b_eq=b)
    value = float(c @ res.x) + h.min() * float(x.sum())
    return value, _flows_to_map(res.x[:d * d], gamma), res


def _check_beta(beta):
    if beta == 0:
        raise ZeroBeta("beta must be nonzero")


def lp_constants(obs, beta):
    """Max (F) and min (K) of ``h . M (h - t)`` over macrostate GP-maps."""
    _check_beta(beta)
    if obs.d < 3:
        raise DimensionTooSmall("macrostate GP-map constants need d >= 3")
    direction = obs.h - t_matrix(obs)
    try:
        f, f_map, f_res = _solve(obs, beta, direction, True, -1.0)
        k, k_map, k_res = _solve(obs, beta, direction, True, 1.0)
    except LPError as exc:  # the identity is always feasible
        raise RuntimeError(f"GP-map LP failed: {exc}") from exc
    status = {"f_map": f_map, "k_map": k_map,
              "pivots": f_res.pivots + k_res.pivots,
              "max_violation": max(f_res.max_violation, k_res.max_violation)}
    return GPConstants(f, k, status)


def gp_energy_bounds(e, obs, beta, constants=None):
    """Range of energies reachable from ``(e, H)`` by macrostate GP-maps.

    Piecewise linear in ``e`` with a kink at the thermal energy; on one side
    the range is capped by ``e`` itself.
    """
    _check_beta(beta)
    if obs.d < 3 or equivalence_class_dim(Macrostate(obs, [e])) < 1:
        raise SingletonClass("the equivalence class of e has a single member")
    constants = constants or lp_constants(obs, beta)
    e_beta = float(thermal_energy(obs, [beta])[0])
    a = alpha(e, obs, beta)
    linear = e_beta + a * constants.k_const
    if e >= e_beta:
        return linear, float(e)
    return float(e), linear


def thermal_energy_bounds(state, obs, beta):
    """Range of ``h . M p`` over all GP-maps, starting from populations ``p``."""
    _check_beta(beta)
    p = state.p
    lo, _, _ = _solve(obs, beta, p, False, 1.0)
    hi, _, _ = _solve(obs, beta, p, False, -1.0)
    return lo, hi


@dataclass(frozen=True)
class BreakdownResult:
    rows: list
    strict_gap: bool
    constants: GPConstants

    columns = ("e", "gp_min", "gp_max", "th_min", "th_max", "e_beta")

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([f"{row[c]:.17g}" for c in self.columns])
        return buf.getvalue()


def interior_grid(obs, count):
    """``count`` evenly spaced energies strictly inside the spectral range."""
    h = obs.h
    return list(np.linspace(h.min(), h.max(), count + 2)[1:-1])


def breakdown_scan(obs, beta, e_grid, gap_tol=1e-7):
    """Compare macrostate GP-map and GP-map energy ranges along ``e_grid``.

    ``strict_gap`` reports whether the GP-map range starting from the
    canonical ensemble is strictly wider somewhere, which is the breakdown
    of the macrostate/ensemble equivalence under exact energy conservation.
    """
    _check_beta(beta)
    constants = lp_constants(obs, beta)
    e_beta = float(thermal_energy(obs, [beta])[0])
    rows = []
    strict = False
    for e in e_grid:
        gp_min, gp_max = gp_energy_bounds(e, obs, beta, constants)
        gamma = fit_canonical(obs, e).state
        th_min, th_max = thermal_energy_bounds(gamma, obs, beta)
        rows.append({"e": float(e), "gp_min": gp_min, "gp_max": gp_max,
                     "th_min": th_min, "th_max": th_max, "e_beta": e_beta})
        if th_max - gp_max > gap_tol or gp_min - th_min > gap_tol:
            strict = True
    return BreakdownResult(rows, strict, constants)
