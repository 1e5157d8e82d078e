"""Commuting observables, macrostates and diagonal microstates.

All observables share one eigenbasis, so a microstate is represented by its
population vector over the ``d`` joint eigenlevels. ``dephase`` is the one
bridge from dense density matrices into that representation.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import (DimensionMismatch, InfeasibleMacrostate, InvalidState,
                     LPError, SingletonClassWarning)
from .lp import linprog


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ObservableSet:
    """Joint spectrum of ``n`` commuting observables on ``d`` levels.

    ``eigenvalues[j, a]`` is the eigenvalue of observable ``j`` on level
    ``a``. Single-observable sets built through :meth:`from_spectrum` are
    sorted non-decreasing; ``order[a]`` is the caller's original index of
    stored level ``a``.
    """

    eigenvalues: np.ndarray
    order: np.ndarray = field(default=None)

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.eigenvalues, dtype=float))
        if q.ndim != 2:
            raise ValueError("eigenvalues must be an (n, d) table")
        n, d = q.shape
        if d < 2 or n < 1:
            raise ValueError(f"need d >= 2 and n >= 1, got d={d}, n={n}")
        if not np.all(np.isfinite(q)):
            raise ValueError("eigenvalues must be finite")
        order = np.arange(d) if self.order is None else np.asarray(self.order)
        object.__setattr__(self, "eigenvalues", _frozen(q))
        order = np.array(order, dtype=int)
        order.setflags(write=False)
        object.__setattr__(self, "order", order)

    @classmethod
    def from_spectrum(cls, h):
        """Single observable (a Hamiltonian), stored sorted non-decreasing."""
        h = np.asarray(h, dtype=float).ravel()
        order = np.argsort(h, kind="stable")
        return cls(h[order][None, :], order)

    @property
    def d(self):
        return self.eigenvalues.shape[1]

    @property
    def n(self):
        return self.eigenvalues.shape[0]

    @property
    def h(self):
        """The spectrum of a single-observable set."""
        if self.n != 1:
            raise ValueError("h is only defined for a single observable")
        return self.eigenvalues[0]

    def scaled(self, factors):
        f = np.asarray(factors, dtype=float).reshape(-1, 1)
        return ObservableSet(self.eigenvalues * f, self.order)

    def to_dict(self):
        return {"d": self.d, "n": self.n,
                "eigenvalues": self.eigenvalues.tolist()}

    @classmethod
    def from_dict(cls, data):
        q = np.asarray(data["eigenvalues"], dtype=float)
        if q.ndim == 1:
            q = q[None, :]
        if "d" in data and q.shape[1] != data["d"]:
            raise ValueError("'d' does not match eigenvalue table")
        if "n" in data and q.shape[0] != data["n"]:
            raise ValueError("'n' does not match eigenvalue table")
        if q.shape[0] == 1:
            return cls.from_spectrum(q[0])
        return cls(q)


@dataclass(frozen=True)
class Macrostate:
    """Partial information: one mean value per observable."""

    observables: ObservableSet
    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.shape != (self.observables.n,):
            raise DimensionMismatch(
                f"expected {self.observables.n} values, got {v.shape}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def e(self):
        return float(self.values[0])

    def to_dict(self):
        out = self.observables.to_dict()
        out["values"] = self.values.tolist()
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(ObservableSet.from_dict(data), data["values"])

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class DiagonalState:
    """Population vector over the joint eigenlevels."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).ravel()
        if p.size < 1 or not np.all(np.isfinite(p)):
            raise InvalidState("populations must be finite")
        if p.min() < 0.0:
            raise InvalidState(f"negative population {p.min():.3e}")
        if abs(p.sum() - 1.0) > DEFAULT_TOL.normalization:
            raise InvalidState(f"populations sum to {p.sum()!r}")
        object.__setattr__(self, "p", _frozen(p))

    @classmethod
    def normalized(cls, weights):
        """Build a state from nonnegative weights, clipping rounding noise."""
        w = np.clip(np.asarray(weights, dtype=float), 0.0, None)
        return cls(w / w.sum())

    @property
    def d(self):
        return self.p.size

    def to_dict(self):
        return {"p": self.p.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["p"])


@dataclass(frozen=True)
class HermitianState:
    """Dense density matrix; only consumed by :func:`dephase`."""

    rho: np.ndarray
    tol: ToleranceConfig = DEFAULT_TOL

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidState("density matrix must be square")
        if np.abs(rho - rho.conj().T).max() > self.tol.hermiticity:
            raise InvalidState("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > self.tol.normalization:
            raise InvalidState("density matrix trace differs from 1")
        if np.linalg.eigvalsh(rho).min() < -self.tol.psd:
            raise InvalidState("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)


def _check_dim(state, obs):
    if state.d != obs.d:
        raise DimensionMismatch(f"state has {state.d} levels, observables {obs.d}")


def expectation(state, obs):
    """Mean value of every observable, ``sum_a p_a q^j_a``."""
    _check_dim(state, obs)
    return obs.eigenvalues @ state.p


def is_compatible(state, m, tol=DEFAULT_TOL.compatibility):
    if not tol > 0:
        raise ValueError("tol must be positive")
    return bool(np.all(np.abs(expectation(state, m.observables) - m.values) <= tol))


def shannon_entropy(state):
    """Entropy in nats, with 0 ln 0 = 0."""
    p = state.p if isinstance(state, DiagonalState) else np.asarray(state)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def _constraints(m):
    q = m.observables.eigenvalues
    A = np.vstack([np.ones(q.shape[1]), q])
    b = np.concatenate([[1.0], m.values])
    return A, b


def _class_face(m):
    """Levels that can carry weight in the class, plus a relative-interior point.

    One LP per level maximizes that level's population over the class.
    """
    A, b = _constraints(m)
    d = A.shape[1]
    support = np.zeros(d, dtype=bool)
    points = []
    for a in range(d):
        c = np.zeros(d)
        c[a] = -1.0
        try:
            res = linprog(c, A_eq=A, b_eq=b)
        except LPError as exc:
            raise InfeasibleMacrostate(
                f"no probability vector has mean values {m.values.tolist()}") from exc
        if -res.fun > 1e-12:
            support[a] = True
            points.append(res.x)
    if not points:
        points.append(res.x)
    center = np.mean(points, axis=0)
    center[~support] = 0.0
    return support, center


def equivalence_class_dim(m):
    """Affine dimension of the set of diagonal states compatible with ``m``."""
    support, _ = _class_face(m)
    A, _ = _constraints(m)
    return int(support.sum() - np.linalg.matrix_rank(A[:, support], tol=1e-10))


def _project(x, A_pinv, A, b):
    return x - (A_pinv @ (A @ x.T - b[:, None])).T


def sample_compatible(m, count, seed, tol=DEFAULT_TOL):
    """Draw ``count`` diagonal states from the equivalence class of ``m``.

    Dirichlet draws on the class face are projected onto the affine
    constraint set and rejected if they leave the simplex. After
    ``tol.sample_retries`` rejections a draw is instead pulled toward an
    interior point of the class until it is nonnegative.
    """
    rng = np.random.default_rng(seed)
    support, center = _class_face(m)
    A, b = _constraints(m)
    A_s = A[:, support]
    k = int(support.sum())
    dim = k - np.linalg.matrix_rank(A_s, tol=1e-10)
    d = m.observables.d

    def lift(x):
        p = np.zeros(d)
        p[support] = x
        return DiagonalState.normalized(p)

    if dim == 0:
        warnings.warn("equivalence class has a single member",
                      SingletonClassWarning, stacklevel=2)
        return [lift(center[support])]

    A_pinv = np.linalg.pinv(A_s)
    c = center[support]
    out = []
    while len(out) < count:
        accepted = None
        for _ in range(max(1, tol.sample_retries // 64)):
            x = _project(rng.dirichlet(np.ones(k), size=64), A_pinv, A_s, b)
            ok = np.flatnonzero(x.min(axis=1) >= 0.0)
            if ok.size:
                accepted = x[ok[0]]
                break
        if accepted is None:
            x = _project(rng.dirichlet(np.ones(k))[None, :], A_pinv, A_s, b)[0]
            step = x - c
            neg = step < 0
            t = min(1.0, 0.999 * np.min(-c[neg] / step[neg])) if neg.any() else 1.0
            accepted = c + t * step
        state = lift(_project(accepted[None, :], A_pinv, A_s, b)[0])
        if is_compatible(state, m, tol.compatibility):
            out.append(state)
    return out


def _joint_blocks(obs, atol=1e-12):
    """Group level indices by identical joint eigenvalue tuples."""
    q = obs.eigenvalues.T
    blocks = []
    assigned = np.zeros(obs.d, dtype=bool)
    for a in range(obs.d):
        if assigned[a]:
            continue
        members = np.flatnonzero(np.all(np.abs(q - q[a]) <= atol, axis=1) & ~assigned)
        assigned[members] = True
        blocks.append(members)
    return blocks


def pinch(rho, obs):
    """Infinite-time average of ``rho`` under evolution by every observable.

    Keeps coherences inside joint degenerate blocks and removes all others.
    """
    if not isinstance(rho, HermitianState):
        rho = HermitianState(rho)
    if rho.rho.shape[0] != obs.d:
        raise DimensionMismatch("density matrix and observables differ in size")
    out = np.zeros_like(rho.rho)
    for blk in _joint_blocks(obs):
        out[np.ix_(blk, blk)] = rho.rho[np.ix_(blk, blk)]
    return out


def dephase(rho, obs):
    """Diagonal state obtained by dephasing ``rho`` in the joint eigenbasis."""
    pinched = pinch(rho, obs)
    return DiagonalState.normalized(np.real(np.diag(pinched)))
