"""Distilling Gibbs microstates from many copies of a macrostate environment.

``copies`` identical systems with integer charges are randomized uniformly
inside every joint eigenspace of the total charges. That map commutes with
the total charges, and the single-copy marginal of the result approaches the
generalized Gibbs ensemble as ``copies`` grows.

Eigenspaces are labelled by total integer charge. Their dimensions and
probabilities follow from a dynamic program over copies, kept in log-space.
The single-copy marginal of the uniform state on eigenspace Q is

    p(x | Q) = D_{N-1}(Q - c_x) / D_N(Q),

where ``D_N(Q)`` counts basis strings of N copies with total charge Q.
"""

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import ChargeRangeOverflow, NonpositiveBeta
from .maxent import fit_canonical, fit_gge
from .spectra import DiagonalState, ObservableSet, expectation

DEFAULT_MEM_BUDGET = 10_000_000


def mem_budget():
    """Lattice-point budget, overridable through ENSEMBLELAB_MEM_BUDGET."""
    return int(os.environ.get("ENSEMBLELAB_MEM_BUDGET", DEFAULT_MEM_BUDGET))


@dataclass(frozen=True)
class IntegerSpectrum:
    """Integer charge table with one rational scale per observable."""

    charges: np.ndarray
    scale: tuple
    error: float

    def observables(self):
        table = self.charges * np.array([float(s) for s in self.scale])[:, None]
        return ObservableSet(table)

    def exact(self):
        """Reconstructed eigenvalues as Fractions."""
        return [[s * int(c) for c in row] for s, row in zip(self.scale, self.charges)]


def integerize(obs, max_denominator):
    """Best rational approximation of every eigenvalue, common denominators cleared.

    Levels keep the order of ``obs``.
    """
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    q = obs.eigenvalues
    charges, scales = [], []
    err = 0.0
    for row in q:
        fracs = [Fraction(float(x)).limit_denominator(max_denominator) for x in row]
        err = max(err, max(abs(float(f) - x) for f, x in zip(fracs, row)))
        lcm = 1
        for f in fracs:
            lcm = lcm * f.denominator // math.gcd(lcm, f.denominator)
        ints = [int(f * lcm) for f in fracs]
        g = 0
        for i in ints:
            g = math.gcd(g, i)
        g = g or 1
        charges.append([i // g for i in ints])
        scales.append(Fraction(g, lcm))
    return IntegerSpectrum(np.array(charges, dtype=np.int64), tuple(scales), err)


@dataclass(frozen=True)
class TypeClassTable:
    copies: int
    total_charge: np.ndarray      # (k, n) integer labels
    log_dimension: np.ndarray     # (k,)
    probability: np.ndarray       # (k,)
    occupation: np.ndarray        # (k, d) single-copy marginal inside each eigenspace

    @property
    def size(self):
        return self.probability.size


def _logaddexp_into(target, sl, values):
    target[sl] = np.logaddexp(target[sl], values)


def _layers(charges, logp, max_copies, budget):
    """Yield ``(N, logD_N, logP_N, shift)`` for N = 0..max_copies.

    Arrays live on a fixed lattice whose index along observable j is
    ``total_charge_j - N * min_j``; ``shift`` holds the per-copy minima.
    """
    n, d = charges.shape
    low = charges.min(axis=1)
    rel = charges - low[:, None]
    span = rel.max(axis=1)
    shape = tuple(int(max_copies * s + 1) for s in span)
    if math.prod(shape) > budget:
        raise ChargeRangeOverflow(
            f"charge lattice of {math.prod(shape)} points exceeds budget {budget}")
    logD = np.full(shape, -np.inf)
    logP = np.full(shape, -np.inf)
    origin = (0,) * n
    logD[origin] = 0.0
    logP[origin] = 0.0
    yield 0, logD, logP, low
    for N in range(1, max_copies + 1):
        newD = np.full(shape, -np.inf)
        newP = np.full(shape, -np.inf)
        for x in range(d):
            dst = tuple(slice(int(r), None) for r in rel[:, x])
            src = tuple(slice(0, sz - int(r)) for sz, r in zip(shape, rel[:, x]))
            _logaddexp_into(newD, dst, logD[src])
            if logp[x] > -np.inf:
                _logaddexp_into(newP, dst, logP[src] + logp[x])
        logD, logP = newD, newP
        yield N, logD, logP, low


def _marginal_terms(logD_prev, logD, logP, rel):
    """``log p_Q + log p(x|Q)`` for every lattice point and level x."""
    d = rel.shape[1]
    shape = logD.shape
    out = np.full((d,) + shape, -np.inf)
    occupied = logD > -np.inf
    for x in range(d):
        dst = tuple(slice(int(r), None) for r in rel[:, x])
        src = tuple(slice(0, sz - int(r)) for sz, r in zip(shape, rel[:, x]))
        shifted = np.full(shape, -np.inf)
        shifted[dst] = logD_prev[src]
        with np.errstate(invalid="ignore"):
            out[x] = np.where(occupied, shifted - np.where(occupied, logD, 0.0), -np.inf)
    return out


def _log_initial(initial):
    with np.errstate(divide="ignore"):
        return np.log(initial.p)


def _tables(ispec, initial, copies_list, budget):
    charges = ispec.charges
    if initial.d != charges.shape[1]:
        raise ValueError("initial state and spectrum differ in dimension")
    wanted = sorted(set(int(c) for c in copies_list))
    if wanted[0] < 1:
        raise ValueError("copies must be >= 1")
    rel = charges - charges.min(axis=1)[:, None]
    prev = None
    out = {}
    for N, logD, logP, low in _layers(charges, _log_initial(initial), wanted[-1], budget):
        if N in wanted:
            out[N] = (prev, logD, logP, low, rel)
        prev = logD
    return out


def eigenspace_table(ispec, initial, copies, budget=None):
    """Per-eigenspace bookkeeping for ``copies`` identical systems."""
    budget = mem_budget() if budget is None else budget
    prev, logD, logP, low, rel = _tables(ispec, initial, [copies], budget)[copies]
    idx = np.argwhere(logD > -np.inf)
    flat = tuple(idx.T)
    terms = _marginal_terms(prev, logD, logP, rel)
    occupation = np.exp(terms[(slice(None),) + flat]).T
    labels = idx + copies * low[None, :]
    return TypeClassTable(copies, labels, logD[flat], np.exp(logP[flat]), occupation)


@dataclass(frozen=True)
class DistillationResult:
    copies: int
    reduced: DiagonalState
    target: DiagonalState
    tv_to_target: float
    log_dim_max: float
    n_eigenspaces: int


def _fit_target(ispec, initial):
    obs = ispec.observables()
    v = expectation(initial, obs)
    if obs.n == 1:
        return fit_canonical(obs, v[0]).state
    return fit_gge(obs, v).state


def distillation_curve(ispec, initial, copies_list, budget=None):
    """Distilled single-copy states for every copy number in ``copies_list``."""
    budget = mem_budget() if budget is None else budget
    target = _fit_target(ispec, initial)
    tables = _tables(ispec, initial, copies_list, budget)
    results = []
    for N in copies_list:
        prev, logD, logP, _, rel = tables[int(N)]
        terms = _marginal_terms(prev, logD, logP, rel) + logP[None]
        d = terms.shape[0]
        flat = terms.reshape(d, -1)
        top = flat.max(axis=1, keepdims=True)
        reduced = np.exp(top[:, 0]) * np.exp(flat - top).sum(axis=1)
        reduced = DiagonalState.normalized(reduced)
        occupied = logD > -np.inf
        results.append(DistillationResult(
            int(N), reduced, target,
            0.5 * float(np.abs(reduced.p - target.p).sum()),
            float(logD[occupied].max()), int(occupied.sum())))
    return results


def distilled_state(ispec, initial, copies, budget=None):
    """Single-copy marginal after randomizing ``copies`` systems per eigenspace.

    Returns ``(reduced, tv_to_target, target)`` where ``target`` is the Gibbs
    ensemble fitted to the mean charges of ``initial``.
    """
    res = distillation_curve(ispec, initial, [copies], budget)[0]
    return res.reduced, res.tv_to_target, res.target


def stirling_sandwich(type_counts):
    """Log of the multinomial ``N! / prod k_x!`` and its Stirling bounds.

    From ``sqrt(2 pi) n^(n+1/2) e^-n <= n! <= e n^(n+1/2) e^-n`` applied to
    the numerator and every nonzero count.
    """
    k = np.asarray(type_counts, dtype=np.int64)
    if np.any(k < 0) or k.sum() < 1:
        raise ValueError("type counts must be nonnegative with a positive total")
    N = int(k.sum())
    nz = k[k > 0].astype(float)
    m = nz.size
    exact = math.lgamma(N + 1) - sum(math.lgamma(x + 1) for x in nz)
    freq = nz / N
    n_entropy = -N * float(freq @ np.log(freq))
    poly = 0.5 * math.log(N) - 0.5 * float(np.log(nz).sum())
    lower = 0.5 * math.log(2 * math.pi) - m + poly + n_entropy
    upper = 1.0 - 0.5 * m * math.log(2 * math.pi) + poly + n_entropy
    return lower, upper, exact


def randomness_gadget(beta):
    """Level spacing that makes a thermal-energy qubit a fair coin pair.

    Two environment qubits with ground population ``1/sqrt(2)`` select
    between two unitaries with probabilities ``p0**2`` and ``1 - p0**2``,
    both one half.
    """
    if not beta > 0:
        raise NonpositiveBeta("the gadget needs a positive-temperature qubit")
    delta = math.log1p(math.sqrt(2.0)) / beta
    # populations in extended precision so the weights round correctly
    with mpmath.workdps(50):
        x = mpmath.exp(-mpmath.mpf(beta) * mpmath.mpf(delta))
        p0 = 1 / (1 + x)
        both_ground = p0 * p0
        return delta, (float(both_ground), float(1 - both_ground))
