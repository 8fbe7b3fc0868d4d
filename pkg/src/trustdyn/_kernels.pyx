# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sequential kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np

from libc.math cimport fabs, isfinite


def latent_scan(double a, b, double t0, const Py_ssize_t[:] idx, const double[:] u):
    cdef Py_ssize_t n = idx.shape[0], k
    cdef double[3] bs
    bs[0] = b[0]; bs[1] = b[1]; bs[2] = b[2]
    out = np.empty(n)
    cdef double[:] o = out
    cdef double t = t0
    for k in range(n):
        t = a * t + bs[idx[k]] + u[k]
        o[k] = t
    return out


def filter_scan(double a, b, c, double q, r, double m0, double p0,
                const Py_ssize_t[:, :] idx, const double[:, :, :] obs,
                const double[:, :] inject):
    cdef Py_ssize_t n_runs = idx.shape[0], n_steps = idx.shape[1], i, k, j
    cdef double[3] bs, cs, rs
    for j in range(3):
        bs[j] = b[j]; cs[j] = c[j]; rs[j] = r[j]
    means = np.empty((n_runs, n_steps))
    variances = np.empty((n_runs, n_steps))
    cdef double[:, :] mv = means
    cdef double[:, :] pv = variances
    cdef double a2 = a * a, m, p, info, h, yj
    with nogil:
        for i in range(n_runs):
            m = m0
            p = p0
            for k in range(n_steps):
                m = a * m + bs[idx[i, k]] + inject[i, k]
                p = a2 * p + q
                info = 0.0
                h = 0.0
                for j in range(3):
                    yj = obs[i, k, j]
                    if yj == yj:
                        info += cs[j] * cs[j] / rs[j]
                        h += cs[j] * (yj - cs[j] * m) / rs[j]
                p = p / (1.0 + p * info)
                m = m + p * h
                mv[i, k] = m
                pv[i, k] = p
    return means, variances


def riccati_fixed_point(double a, double q, double info, double p0, double tol, long max_iter):
    cdef double a2 = a * a, p = p0, nxt = p0
    cdef long it
    for it in range(1, max_iter + 1):
        nxt = a2 * p / (1.0 + p * info) + q
        if not isfinite(nxt):
            return nxt, it, False
        if fabs(nxt - p) < tol:
            return nxt, it, True
        p = nxt
    return p, max_iter, False
