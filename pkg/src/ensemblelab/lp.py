"""Two-phase revised simplex with Bland's anti-cycling rule.

Sized for the tiny programs in this package (a few dozen variables). The
basis system is re-solved from scratch at every iteration, so round-off does
not accumulate across pivots. Solves

    minimize    c @ x
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                x >= 0
"""

from dataclasses import dataclass

import numpy as np

from .errors import LPError

COST_TOL = 1e-9       # relative to the largest cost coefficient
PIVOT_TOL = 1e-9      # relative to the largest entry of the entering direction
MAX_PIVOTS = 20_000


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    fun: float
    status: str
    pivots: int
    max_violation: float


def _independent_rows(A, tol=1e-9):
    """Indices of a maximal set of linearly independent rows (Gram-Schmidt)."""
    frame, keep = [], []
    for i, row in enumerate(A):
        norm = np.linalg.norm(row)
        if norm == 0:
            continue
        v = row / norm
        for _ in range(2):
            for u in frame:
                v = v - (u @ v) * u
        rest = np.linalg.norm(v)
        if rest > tol:
            frame.append(v / rest)
            keep.append(i)
    return keep


def _basic_values(A, b, basis):
    x = np.linalg.solve(A[:, basis], b)
    x[(x < 0) & (x > -1e-12)] = 0.0
    return x


def _run(A, b, c, basis, allowed, budget):
    """Bland pivots from a feasible basis; returns (status, pivots)."""
    m, N = A.shape
    cost_tol = COST_TOL * max(1.0, np.abs(c).max())
    pivots = 0
    while True:
        B = A[:, basis]
        xb = _basic_values(A, b, basis)
        y = np.linalg.solve(B.T, c[basis])
        reduced = c - A.T @ y
        reduced[basis] = 0.0
        candidates = np.flatnonzero((reduced < -cost_tol) & allowed)
        if candidates.size == 0:
            return "optimal", pivots
        entering = int(candidates[0])
        w = np.linalg.solve(B, A[:, entering])
        rows = np.flatnonzero(w > PIVOT_TOL * max(1.0, np.abs(w).max()))
        if rows.size == 0:
            return "unbounded", pivots
        ratios = np.maximum(xb[rows], 0.0) / w[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, best)]
        leave = min(tied, key=lambda r: basis[r])
        basis[leave] = entering
        pivots += 1
        if pivots > budget:
            raise LPError("simplex pivot budget exhausted")


def linprog(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None):
    """Solve a small LP in the form given in the module docstring.

    Raises
    ------
    LPError
        If the program is infeasible or unbounded.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    blocks, rhs = [], []
    n_slack = 0
    if A_ub is not None and len(A_ub):
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        n_slack = A_ub.shape[0]
    if A_eq is not None and len(A_eq):
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        blocks.append(np.hstack([A_eq, np.zeros((A_eq.shape[0], n_slack))]))
        rhs.append(np.asarray(b_eq, dtype=float))
    if n_slack:
        blocks.append(np.hstack([A_ub, np.eye(n_slack)]))
        rhs.append(np.asarray(b_ub, dtype=float))
    if not blocks:
        if np.any(c < 0):
            raise LPError("unbounded")
        return LPResult(np.zeros(n), 0.0, "optimal", 0, 0.0)

    A = np.vstack(blocks)
    b = np.concatenate(rhs)
    # equilibrate rows, then columns, so tolerances are scale-free
    norms = np.abs(A).max(axis=1)
    norms[norms == 0] = 1.0
    A = A / norms[:, None]
    b = b / norms
    col = np.abs(A).max(axis=0)
    col[col == 0] = 1.0
    A = A / col
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    A_all, b_all = A, b
    keep = _independent_rows(A)
    A, b = A[keep], b[keep]
    m, N = A.shape

    # phase 1 on artificial variables
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(N), np.ones(m)])
    basis = list(range(N, N + m))
    status, p1 = _run(A1, b, c1, basis, np.ones(N + m, dtype=bool), MAX_PIVOTS)
    if status != "optimal":
        raise LPError("phase 1 did not converge")
    xb = _basic_values(A1, b, basis)
    if sum(v for v, j in zip(xb, basis) if j >= N) > 1e-9 * max(1.0, b.max()):
        raise LPError("infeasible")

    # swap zero-level artificials for structural columns (rows are independent)
    for r in range(m):
        if basis[r] < N:
            continue
        row = np.linalg.solve(A1[:, basis].T, np.eye(m)[r]) @ A
        row[[j for j in basis if j < N]] = 0.0
        basis[r] = int(np.argmax(np.abs(row)))

    cfull = np.concatenate([c, np.zeros(n_slack)]) / col
    status, p2 = _run(A, b, cfull, basis, np.ones(N, dtype=bool), MAX_PIVOTS)
    if status == "unbounded":
        raise LPError("unbounded")

    x_full = np.zeros(N)
    x_full[basis] = np.clip(_basic_values(A, b, basis), 0.0, None)
    violation = float(np.abs((A_all @ x_full - b_all) * norms).max())
    if violation > 1e-7 * max(1.0, float(np.abs(b_all * norms).max())):
        raise LPError(f"equality constraints violated by {violation:.3e}")
    x = (x_full / col)[:n]
    return LPResult(x, float(c @ x), status, p1 + p2, violation)
