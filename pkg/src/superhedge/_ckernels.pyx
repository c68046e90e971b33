# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: simplex pivoting and lattice rollbacks.

Semantics are identical to :mod:`superhedge._pykernels`; the selector in
:mod:`superhedge.kernels` decides which one is used.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


cdef inline void _pivot(double[:, ::1] T, Py_ssize_t pr, Py_ssize_t pc) noexcept nogil:
    cdef Py_ssize_t nrow = T.shape[0]
    cdef Py_ssize_t ncol = T.shape[1]
    cdef Py_ssize_t k, l
    cdef double piv = T[pr, pc]
    cdef double f
    for l in range(ncol):
        T[pr, l] /= piv
    T[pr, pc] = 1.0
    for k in range(nrow):
        if k == pr:
            continue
        f = T[k, pc]
        if f == 0.0:
            continue
        for l in range(ncol):
            T[k, l] -= f * T[pr, l]
        T[k, pc] = 0.0


def simplex_iterate(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t n_enter,
                    double tol, Py_ssize_t max_iter):
    """Run Bland-rule primal simplex pivots on tableau ``T`` in place.

    The last row holds reduced costs, the last column the right-hand side.
    Returns ``(status, iterations)`` with status 0 optimal, 1 unbounded,
    2 iteration limit.
    """
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t rhs = T.shape[1] - 1
    cdef Py_ssize_t it = 0, i, j, enter, leave
    cdef int status = 2
    cdef double a, r, rmin
    with nogil:
        while it < max_iter:
            enter = -1
            for j in range(n_enter):
                if T[m, j] < -tol:
                    enter = j
                    break
            if enter < 0:
                status = 0
                break
            rmin = INFINITY
            for i in range(m):
                a = T[i, enter]
                if a > tol:
                    r = T[i, rhs] / a
                    if r < rmin:
                        rmin = r
            if rmin == INFINITY:
                status = 1
                break
            leave = -1
            for i in range(m):
                a = T[i, enter]
                if a > tol:
                    r = T[i, rhs] / a
                    if r <= rmin + tol:
                        if leave < 0 or basis[i] < basis[leave]:
                            leave = i
            _pivot(T, leave, enter)
            basis[leave] = enter
            it += 1
    return status, it


def rollback_recombining(double[::1] terminal, double[::1] lam, double[::1] oml):
    """Backward induction on a recombining binomial lattice.

    ``terminal[j]`` is the payoff at the node with ``j`` up-moves after
    ``n = len(lam)`` steps. Row ``t`` of the result holds ``h(t, .)`` in its
    first ``t + 1`` entries.
    """
    cdef Py_ssize_t n = lam.shape[0]
    cdef Py_ssize_t t, j
    out = np.zeros((n + 1, n + 1), dtype=np.float64)
    cdef double[:, ::1] H = out
    for j in range(n + 1):
        H[n, j] = terminal[j]
    for t in range(n - 1, -1, -1):
        for j in range(t + 1):
            H[t, j] = lam[t] * H[t + 1, j] + oml[t] * H[t + 1, j + 1]
    return out


cdef double _payoff(double x, double[::1] slopes, double[::1] intercepts) noexcept nogil:
    cdef Py_ssize_t i
    cdef double best = slopes[0] * x + intercepts[0]
    cdef double v
    for i in range(1, slopes.shape[0]):
        v = slopes[i] * x + intercepts[i]
        if v > best:
            best = v
    return best


cdef double _eval(double x, Py_ssize_t t, double[::1] kd, double[::1] ku,
                  double[::1] lam, double[::1] oml, cnp.int64_t[::1] kind, double M,
                  double[::1] slopes, double[::1] intercepts) noexcept nogil:
    if t == kd.shape[0]:
        return _payoff(x, slopes, intercepts)
    if kind[t] == 2:
        return _eval(x, t + 1, kd, ku, lam, oml, kind, M, slopes, intercepts)
    if kind[t] == 1:
        return (_eval(kd[t] * x, t + 1, kd, ku, lam, oml, kind, M, slopes, intercepts)
                + (1.0 - kd[t]) * x * M)
    return (lam[t] * _eval(kd[t] * x, t + 1, kd, ku, lam, oml, kind, M, slopes, intercepts)
            + oml[t] * _eval(ku[t] * x, t + 1, kd, ku, lam, oml, kind, M, slopes, intercepts))


def eval_point(double x, Py_ssize_t t, double[::1] kd, double[::1] ku,
               double[::1] lam, double[::1] oml, cnp.int64_t[::1] kind, double M,
               double[::1] slopes, double[::1] intercepts):
    """h(t, x) for a max-affine payoff by depth-first recursion over the remaining steps.

    ``kind[s]``: 0 two-branch step, 1 infinite upper multiplier, 2 degenerate
    ``k_d = k_u = 1`` step.
    """
    cdef double out
    with nogil:
        out = _eval(x, t, kd, ku, lam, oml, kind, M, slopes, intercepts)
    return out
