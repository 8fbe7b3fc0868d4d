"""Pure-Python implementations of the sequential kernels.

These mirror ``_kernels.pyx`` operation for operation so both backends give
bit-identical results.  Used when the compiled extension is unavailable.
"""

import math

import numpy as np


def latent_scan(a, b, t0, idx, u):
    n = len(idx)
    out = np.empty(n)
    t = float(t0)
    b0, b1, b2 = float(b[0]), float(b[1]), float(b[2])
    bs = (b0, b1, b2)
    for k in range(n):
        t = a * t + bs[idx[k]] + u[k]
        out[k] = t
    return out


def filter_scan(a, b, c, q, r, m0, p0, idx, obs, inject):
    """Batched scalar Kalman filter over ``runs x steps``.

    ``idx`` (runs, steps) event indices, ``obs`` (runs, steps, 3) with NaN for
    missing channels, ``inject`` (runs, steps) additive terms on the
    predicted mean.  Returns posterior means and variances (runs, steps).
    """
    n_runs, n_steps = idx.shape
    means = np.empty((n_runs, n_steps))
    variances = np.empty((n_runs, n_steps))
    bs = (float(b[0]), float(b[1]), float(b[2]))
    cs = (float(c[0]), float(c[1]), float(c[2]))
    rs = (float(r[0]), float(r[1]), float(r[2]))
    a2 = a * a
    idx_l = idx.tolist()
    obs_l = obs.tolist()
    inj_l = inject.tolist()
    for i in range(n_runs):
        m = float(m0)
        p = float(p0)
        row_idx = idx_l[i]
        row_obs = obs_l[i]
        row_inj = inj_l[i]
        for k in range(n_steps):
            m = a * m + bs[row_idx[k]] + row_inj[k]
            p = a2 * p + q
            info = 0.0
            h = 0.0
            y = row_obs[k]
            for j in range(3):
                yj = y[j]
                if yj == yj:
                    info += cs[j] * cs[j] / rs[j]
                    h += cs[j] * (yj - cs[j] * m) / rs[j]
            p = p / (1.0 + p * info)
            m = m + p * h
            means[i, k] = m
            variances[i, k] = p
    return means, variances


def riccati_fixed_point(a, q, info, p0, tol, max_iter):
    """Iterate the predicted-variance recursion until the step falls below tol.

    Returns ``(p, iterations, converged)``.
    """
    a2 = a * a
    p = float(p0)
    for it in range(1, max_iter + 1):
        nxt = a2 * p / (1.0 + p * info) + q
        if not math.isfinite(nxt):
            return nxt, it, False
        if abs(nxt - p) < tol:
            return nxt, it, True
        p = nxt
    return p, max_iter, False
