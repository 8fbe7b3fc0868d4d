"""Reference computations kept independent of the package's code paths."""

import numpy as np


def condition_joint_gaussian(a_mean, a_var, c, r, y):
    """Posterior of T given y = c T + w by forming the dense (T, y) joint.

    Builds the (1 + k) x (1 + k) joint covariance, then conditions with an explicit
    matrix inverse.  No information-form algebra.
    """
    c = np.asarray(c, dtype=float)
    k = c.size
    cov = np.empty((k + 1, k + 1))
    cov[0, 0] = a_var
    cov[0, 1:] = a_var * c
    cov[1:, 0] = a_var * c
    cov[1:, 1:] = a_var * np.outer(c, c) + np.diag(r)
    mean = np.concatenate([[a_mean], c * a_mean])
    s_inv = np.linalg.inv(cov[1:, 1:])
    post_mean = mean[0] + cov[0, 1:] @ s_inv @ (np.asarray(y) - mean[1:])
    post_var = cov[0, 0] - cov[0, 1:] @ s_inv @ cov[1:, 0]
    return float(post_mean), float(post_var)


def riccati_brute_force(a, c, q, r, n_iter, p0=0.0):
    """Predicted-variance recursion with sequential per-channel gain updates."""
    p = float(p0)
    pairs = [(float(cj) * float(cj), float(rj)) for cj, rj in zip(c, r)]
    a2 = a * a
    for _ in range(n_iter):
        for c2, rj in pairs:
            p = p - p * p * c2 / (c2 * p + rj)
        p = a2 * p + q
    return p


def posterior_from_prior(p, c, r):
    for cj, rj in zip(c, r):
        p = p - p * p * cj * cj / (cj * cj * p + rj)
    return p
