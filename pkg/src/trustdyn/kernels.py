"""Backend selection for the sequential kernels.

The compiled extension is used when importable; set ``TRUSTDYN_PURE_PYTHON=1``
to force the pure-Python fallback.  ``BACKEND`` names the active one.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("TRUSTDYN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"


def latent_scan(a, b, t0, idx, u):
    idx = np.ascontiguousarray(idx, dtype=np.intp)
    u = np.ascontiguousarray(u, dtype=float)
    return _impl.latent_scan(float(a), np.asarray(b, dtype=float), float(t0), idx, u)


def filter_scan(a, b, c, q, r, m0, p0, idx, obs, inject=None, impl=None):
    impl = _impl if impl is None else impl
    idx = np.ascontiguousarray(np.atleast_2d(idx), dtype=np.intp)
    obs = np.ascontiguousarray(obs, dtype=float).reshape(idx.shape + (3,))
    if inject is None:
        inject = np.zeros(idx.shape)
    inject = np.ascontiguousarray(inject, dtype=float).reshape(idx.shape)
    return impl.filter_scan(
        float(a), np.asarray(b, dtype=float), np.asarray(c, dtype=float), float(q),
        np.asarray(r, dtype=float), float(m0), float(p0), idx, obs, inject,
    )


def riccati_fixed_point(a, q, info, p0, tol, max_iter, impl=None):
    impl = _impl if impl is None else impl
    return impl.riccati_fixed_point(float(a), float(q), float(info), float(p0), float(tol), int(max_iter))
