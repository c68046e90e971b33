"""Dense two-phase simplex with Bland's anti-cycling rule.

Problems here are small (scenario-tree and one-step pricing LPs), so the
solver favours robustness: Bland's rule, an absolute tolerance, and a final
basis solve that removes pivoting drift from the reported optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

TOL = 1e-9


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    """Outcome of :func:`linprog`.

    ``status`` is ``"optimal"``, ``"infeasible"`` or ``"unbounded"``. ``fun`` is
    ``-inf`` for unbounded problems and ``nan`` for infeasible ones. For
    infeasible problems ``farkas`` holds multipliers ``y`` on the original
    constraint rows (inequality rows first) with ``y_ub >= 0``,
    ``y @ A >= 0`` (``= 0`` on free columns) and ``y @ b < 0``.
    """

    status: str
    x: np.ndarray | None
    fun: float
    iterations: int = 0
    farkas: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _as_2d(A, n):
    if A is None:
        return np.zeros((0, n))
    A = np.asarray(A, dtype=float)
    return A.reshape(-1, n)


def linprog(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    free=None,
    tol: float = TOL,
    max_iter: int | None = None,
) -> LPResult:
    """Minimize ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are non-negative unless flagged in the boolean mask ``free``
    (``free=True`` frees all of them).
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    A_ub = _as_2d(A_ub, n)
    A_eq = _as_2d(A_eq, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if A_ub.shape[0] != b_ub.size or A_eq.shape[0] != b_eq.size:
        raise ValueError("constraint matrix and right-hand side sizes differ")
    if free is None or free is False:
        free_mask = np.zeros(n, dtype=bool)
    elif free is True:
        free_mask = np.ones(n, dtype=bool)
    else:
        free_mask = np.asarray(free, dtype=bool)

    # split free variables into positive and negative parts
    neg_idx = np.flatnonzero(free_mask)
    ns = n + neg_idx.size
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    A = np.zeros((m, ns + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:ns] = -A_ub[:, neg_idx]
    A[:m_ub, ns:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    A[m_ub:, n:ns] = -A_eq[:, neg_idx]
    b = np.concatenate([b_ub, b_eq])
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b = b * sign
    cost = np.concatenate([c, -c[neg_idx], np.zeros(m_ub)])
    nreal = ns + m_ub

    if max_iter is None:
        max_iter = 50 * (m + nreal) + 1000

    needs_art = np.ones(m, dtype=bool)
    needs_art[:m_ub] = sign[:m_ub] < 0
    art_rows = np.flatnonzero(needs_art)
    na = art_rows.size

    T = np.zeros((m + 1, nreal + na + 1))
    T[:m, :nreal] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=np.intp)
    basis[:m_ub] = ns + np.arange(m_ub)
    for k, i in enumerate(art_rows):
        T[i, nreal + k] = 1.0
        basis[i] = nreal + k

    iterations = 0
    if na:
        T[m, :nreal] = -T[art_rows, :nreal].sum(axis=0)
        T[m, -1] = -T[art_rows, -1].sum()
        status, it = kernels.simplex_iterate(T, basis, nreal, tol, max_iter)
        iterations += it
        if status == 2:
            raise LPError("phase 1 iteration limit reached")
        infeas = -T[m, -1]
        if infeas > tol * max(1.0, float(np.abs(b).max(initial=0.0))):
            A_full = np.hstack([A, np.zeros((m, na))])
            for k, i in enumerate(art_rows):
                A_full[i, nreal + k] = 1.0
            c1 = np.zeros(nreal + na)
            c1[nreal:] = 1.0
            try:
                pi = np.linalg.solve(A_full[:, basis].T, c1[basis])
            except np.linalg.LinAlgError:
                pi = None
            farkas = None if pi is None else -pi * sign
            return LPResult("infeasible", None, float("nan"), iterations, farkas)
        # drive remaining artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= nreal:
                cand = np.flatnonzero(np.abs(T[i, :nreal]) > tol)
                if cand.size:
                    kernels.get_backend("python")._pivot(T, i, int(cand[0]))
                    basis[i] = int(cand[0])
                else:
                    keep[i] = False
        T = np.vstack([T[:m][keep], T[m:]])
        T = np.ascontiguousarray(np.hstack([T[:, :nreal], T[:, -1:]]))
        basis = np.ascontiguousarray(basis[keep])
        A = A[keep]
        b = b[keep]
        m = basis.size

    T[m, :] = 0.0
    T[m, :nreal] = cost
    for i in range(m):
        cb = cost[basis[i]]
        if cb != 0.0:
            T[m] -= cb * T[i]
    status, it = kernels.simplex_iterate(T, basis, nreal, tol, max_iter)
    iterations += it
    if status == 2:
        raise LPError("phase 2 iteration limit reached")
    if status == 1:
        return LPResult("unbounded", None, float("-inf"), iterations)

    xs = np.zeros(nreal)
    xs[basis] = T[:m, -1]
    if m:
        try:
            xb = np.linalg.solve(A[:, basis], b)
        except np.linalg.LinAlgError:
            xb = None
        if xb is not None and np.all(np.isfinite(xb)) and xb.min(initial=0.0) > -tol:
            xs[:] = 0.0
            xs[basis] = np.maximum(xb, 0.0)
    x = xs[:n].copy()
    x[neg_idx] -= xs[n:ns]
    fun = float(cost[basis] @ xs[basis]) if m else 0.0
    return LPResult("optimal", x, fun, iterations)
