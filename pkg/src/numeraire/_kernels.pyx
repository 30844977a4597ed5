# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in :mod:`numeraire._kernels_py`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, INFINITY

cnp.import_array()


def em_steps(P, q, lam, Py_ssize_t steps, double tol):
    cdef double[:, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lam_arr = np.array(lam, dtype=np.float64)
    cdef double[::1] lv = lam_arr
    cdef Py_ssize_t n = Pv.shape[0], m = Pv.shape[1], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] trace = np.empty(steps + 1)
    cdef double[::1] p = np.empty(m)
    cdef double[::1] r = np.empty(n)
    cdef double h, s, rmax, residual
    cdef Py_ssize_t done = 0
    while True:
        h = 0.0
        for j in range(m):
            s = 0.0
            for i in range(n):
                s += lv[i] * Pv[i, j]
            p[j] = s
            h += qv[j] * (log(qv[j]) - log(s))
        trace[done] = h
        rmax = -INFINITY
        for i in range(n):
            s = 0.0
            for j in range(m):
                s += qv[j] * Pv[i, j] / p[j]
            r[i] = s
            if s > rmax:
                rmax = s
        residual = rmax - 1.0
        if residual <= tol or done == steps:
            break
        s = 0.0
        for i in range(n):
            lv[i] = lv[i] * r[i]
            s += lv[i]
        for i in range(n):
            lv[i] = lv[i] / s
        done += 1
    return lam_arr, done, residual, trace[:done + 1].copy()


def simplex_grid_search(P, q, long K):
    cdef double[:, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t n = Pv.shape[0], m = Pv.shape[1], i, j
    cdef long[::1] k = np.zeros(n, dtype=np.int64)
    cdef long[::1] best_k = np.zeros(n, dtype=np.int64)
    cdef double val, s, best = -INFINITY
    cdef double invK = 1.0 / K
    cdef long rest
    cdef bint have = False
    k[n - 1] = K
    while True:
        val = 0.0
        for j in range(m):
            s = 0.0
            for i in range(n):
                s += k[i] * invK * Pv[i, j]
            if s <= 0.0:
                val = -INFINITY
                break
            val += qv[j] * log(s)
        if val > best or not have:
            best = val
            have = True
            for i in range(n):
                best_k[i] = k[i]
        # next composition in lexicographic order of (k_0, ..., k_{n-2})
        if n == 1:
            break
        i = n - 2
        while i >= 0:
            rest = k[n - 1]
            if rest > 0:
                k[i] += 1
                k[n - 1] = rest - 1
                break
            # carry: reset k_i and give its units back to the last slot
            k[n - 1] += k[i]
            k[i] = 0
            i -= 1
        if i < 0:
            break
    return np.asarray(best_k, dtype=np.float64) / K, float(best)
