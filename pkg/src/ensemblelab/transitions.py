"""Reachability oracles, work bounds, passivity and the rescaled-swap protocol.

A macrostate behaves exactly like its maximum-entropy ensemble, so whether
``(v, Q)`` can be turned into a target microstate reduces to comparing a
free-energy-type monotone of the fitted ensemble with that of the target.
"""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL
from .errors import IncompatibleState, SizeLimit, ZeroBeta
from .maxent import (fit_canonical, fit_gge, free_energy, free_entropy,
                     gibbs_state, gibbs_entropy_macro)
from .spectra import DiagonalState, Macrostate, ObservableSet, is_compatible

MAX_COMPOSITE_DIM = 4096


@dataclass(frozen=True)
class ReachabilityVerdict:
    allowed: bool
    lhs: float
    rhs: float
    margin: float

    def to_dict(self):
        return {"allowed": self.allowed, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin}


@dataclass(frozen=True)
class WorkReport:
    delta_f: float
    initial_f: float
    final_f: float

    def to_dict(self):
        return {"delta_f": self.delta_f, "initial_f": self.initial_f,
                "final_f": self.final_f}


def _nonzero(beta):
    if np.any(np.atleast_1d(beta) == 0):
        raise ZeroBeta("environment multipliers must be nonzero")


def reachable_canonical(m, target, beta, tol=DEFAULT_TOL):
    """Decide ``(e, H) -> target`` with a bath at inverse temperature ``beta``.

    Allowed iff the free energy of the canonical ensemble is at least that of
    the target. For negative ``beta`` the monotone ``beta * F`` decreases, so
    the comparison flips; ``margin`` is always oriented so that
    ``allowed == (margin >= -tol)``.
    """
    _nonzero(beta)
    gamma = fit_canonical(m.observables, m.e, tol).state
    lhs = free_energy(gamma, m.observables, beta)
    rhs = free_energy(target, m.observables, beta)
    margin = float(np.sign(beta)) * (lhs - rhs)
    return ReachabilityVerdict(margin >= -tol.decision, lhs, rhs, margin)


def reachable_gge(m, target, beta, tol=DEFAULT_TOL):
    """Decide ``(v, Q) -> target`` by comparing free entropies."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    _nonzero(beta)
    gamma = fit_gge(m.observables, m.values, tol).state
    lhs = free_entropy(gamma, m.observables, beta)
    rhs = free_entropy(target, m.observables, beta)
    margin = lhs - rhs
    return ReachabilityVerdict(margin >= -tol.decision, lhs, rhs, margin)


def work_bound(m, beta, tol=DEFAULT_TOL):
    """Optimal extractable work: F of the canonical ensemble minus F at equilibrium."""
    _nonzero(beta)
    obs = m.observables
    initial = free_energy(fit_canonical(obs, m.e, tol).state, obs, beta)
    final = free_energy(gibbs_state(obs, [beta]), obs, beta)
    return WorkReport(initial - final, initial, final)


def clausius_check(e, e_prime, obs, beta, tol=DEFAULT_TOL):
    """Whether ``(e, H)`` may relax to the canonical ensemble at ``e_prime``.

    The free-energy criterion decides. For positive ``beta`` it is the same
    as ``e' - e <= (S(e', H) - S(e, H)) / beta`` up to the decision
    tolerance; for negative ``beta`` that inequality is reversed.
    """
    _nonzero(beta)
    target = fit_canonical(obs, e_prime, tol).state
    return reachable_canonical(Macrostate(obs, [e]), target, beta, tol).allowed


def clausius_terms(e, e_prime, obs, beta, tol=DEFAULT_TOL):
    """Heat-like and entropy-like sides of the Clausius form: (e' - e, dS / beta)."""
    _nonzero(beta)
    ds = (gibbs_entropy_macro(Macrostate(obs, [e_prime]), tol)
          - gibbs_entropy_macro(Macrostate(obs, [e]), tol))
    return e_prime - e, ds / beta


def passive_energy(p, h):
    """Lowest mean energy over all permutations of the populations."""
    return float(np.sort(p)[::-1] @ np.sort(h))


def ergotropy(state, obs):
    """Mean energy above the passive rearrangement of ``state``."""
    p = state.p if isinstance(state, DiagonalState) else np.asarray(state)
    h = obs.h
    return max(0.0, float(p @ h) - passive_energy(p, h))


def _product_gibbs(h, beta, copies):
    """Populations and total energies of ``copies`` Gibbs copies, as flat vectors."""
    g = gibbs_state(ObservableSet.from_spectrum(h), [beta])
    hs = np.sort(h)
    p = np.ones(1)
    e = np.zeros(1)
    for _ in range(copies):
        p = np.kron(p, g.p)
        e = np.add.outer(e, hs).ravel()
    return p, e


def trivialization_witness(h1, beta1, h2, beta2, n1, n2):
    """Ergotropy of ``n1`` copies of one Gibbs bath next to ``n2`` of another.

    With unequal temperatures the composite eventually stops being passive,
    so work can be drawn from equilibrium-looking baths alone.
    """
    h1 = h1.h if isinstance(h1, ObservableSet) else np.asarray(h1, dtype=float)
    h2 = h2.h if isinstance(h2, ObservableSet) else np.asarray(h2, dtype=float)
    if n1 < 1 or n2 < 1:
        raise ValueError("copy numbers must be >= 1")
    dim = h1.size ** n1 * h2.size ** n2
    if dim > MAX_COMPOSITE_DIM:
        raise SizeLimit(f"composite dimension {dim} exceeds {MAX_COMPOSITE_DIM}")
    p1, e1 = _product_gibbs(h1, beta1, n1)
    p2, e2 = _product_gibbs(h2, beta2, n2)
    p = np.kron(p1, p2)
    e = np.add.outer(e1, e2).ravel()
    return max(0.0, float(p @ e) - passive_energy(p, e))


def witness_scan(h1, beta1, h2, beta2, max_copies):
    """Witness for ``n1 = n2 = n`` over ``n = 1..max_copies``."""
    return [trivialization_witness(h1, beta1, h2, beta2, n, n)
            for n in range(1, max_copies + 1)]


@dataclass(frozen=True)
class SwapResult:
    new_system: DiagonalState
    new_env: DiagonalState
    env_spectrum: ObservableSet
    delta_mean_energy: float


def rescaled_swap(system_state, m, beta, tol=DEFAULT_TOL):
    """Swap the system with a Gibbs environment whose Hamiltonian is rescaled.

    The environment carries ``H_E = (beta_S(e) / beta) H`` at bath inverse
    temperature ``beta``, so its Gibbs state coincides with the canonical
    ensemble of the system macrostate. Total mean energy is conserved for
    every compatible input state.
    """
    _nonzero(beta)
    obs = m.observables
    if not is_compatible(system_state, m, tol.compatibility):
        raise IncompatibleState("system state does not match the macrostate")
    sol = fit_canonical(obs, m.e, tol)
    ratio = float(sol.beta[0]) / beta
    env_obs = obs.scaled([ratio])
    env_state = gibbs_state(env_obs, [beta])
    h, h_env = obs.h, env_obs.h
    before = system_state.p @ h + env_state.p @ h_env
    after = env_state.p @ h + system_state.p @ h_env
    return SwapResult(env_state, system_state, env_obs, float(after - before))
