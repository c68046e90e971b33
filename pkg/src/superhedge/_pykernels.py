"""Pure-Python/numpy versions of the compiled kernels in ``_ckernels.pyx``."""

from __future__ import annotations

import numpy as np


def _pivot(T: np.ndarray, pr: int, pc: int) -> None:
    T[pr] /= T[pr, pc]
    T[pr, pc] = 1.0
    f = T[:, pc].copy()
    f[pr] = 0.0
    nz = np.flatnonzero(f)
    if nz.size:
        T[nz] -= np.outer(f[nz], T[pr])
        T[nz, pc] = 0.0


def simplex_iterate(T, basis, n_enter, tol, max_iter):
    m = T.shape[0] - 1
    it = 0
    while it < max_iter:
        neg = np.flatnonzero(T[m, :n_enter] < -tol)
        if neg.size == 0:
            return 0, it
        j = int(neg[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return 1, it
        ratios = T[rows, -1] / col[rows]
        rmin = ratios.min()
        ties = rows[ratios <= rmin + tol]
        i = int(ties[np.argmin(basis[ties])])
        _pivot(T, i, j)
        basis[i] = j
        it += 1
    return 2, it


def rollback_recombining(terminal, lam, oml):
    n = len(lam)
    H = np.zeros((n + 1, n + 1))
    H[n] = terminal
    for t in range(n - 1, -1, -1):
        H[t, : t + 1] = lam[t] * H[t + 1, : t + 1] + oml[t] * H[t + 1, 1 : t + 2]
    return H


_MAX_VECTOR_BRANCHES = 18


def eval_point(x, t, kd, ku, lam, oml, kind, M, slopes, intercepts):
    n = len(kd)
    if t < n and int(np.count_nonzero(np.asarray(kind[t:]) == 0)) > _MAX_VECTOR_BRANCHES:
        # peel one step off so the vectorized expansion stays within memory
        args = (kd, ku, lam, oml, kind, M, slopes, intercepts)
        if kind[t] == 0:
            return (lam[t] * eval_point(kd[t] * x, t + 1, *args)
                    + oml[t] * eval_point(ku[t] * x, t + 1, *args))
        if kind[t] == 1:
            return eval_point(kd[t] * x, t + 1, *args) + (1.0 - kd[t]) * x * M
        return eval_point(x, t + 1, *args)
    levels = [np.array([x], dtype=float)]
    for s in range(t, n):
        xs = levels[-1]
        if kind[s] == 0:
            xs = np.stack([kd[s] * xs, ku[s] * xs], axis=1).ravel()
        elif kind[s] == 1:
            xs = kd[s] * xs
        levels.append(xs)
    h = np.max(np.outer(levels[-1], slopes) + intercepts, axis=1)
    for s in range(n - 1, t - 1, -1):
        xs = levels[s - t]
        if kind[s] == 0:
            h = lam[s] * h[0::2] + oml[s] * h[1::2]
        elif kind[s] == 1:
            h = h + (1.0 - kd[s]) * xs * M
    return float(h[0])
