"""Linear Kalman filter for latent trust.

The state is scalar and the three observation channels are fused in one
measurement update.  Because the noise covariance is diagonal, the update is
computed in information form::

    info = sum_j c_j^2 / r_j
    P+   = P / (1 + P * info)
    m+   = m + P+ * sum_j c_j (y_j - c_j m) / r_j

which equals the gain form ``K = P c' (c P c' + R)^-1`` and cannot produce a
negative variance.  Channels whose observation is NaN are dropped from the
update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, NonConvergenceError, NumericalDegeneracyError
from .model import Event, ModelParameters, TrialLog

DEFAULT_INITIAL_MEAN = 50.0
DEFAULT_INITIAL_VARIANCE = 15.0**2


@dataclass(frozen=True)
class FilterState:
    """Gaussian belief over latent trust."""

    mean: float
    variance: float

    def __post_init__(self):
        mean, var = float(self.mean), float(self.variance)
        if not (math.isfinite(mean) and math.isfinite(var)):
            raise InvalidArgumentError(f"belief must be finite, got ({mean}, {var})")
        if var < 0:
            raise InvalidArgumentError(f"belief variance must be >= 0, got {var}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", var)


@dataclass(frozen=True)
class FilterConfig:
    """Prior for a filter run. Defaults to a weak prior centred on the scale."""

    initial_mean: float = DEFAULT_INITIAL_MEAN
    initial_variance: float = DEFAULT_INITIAL_VARIANCE

    def __post_init__(self):
        if not math.isfinite(self.initial_mean):
            raise InvalidArgumentError("initial_mean must be finite")
        if not (math.isfinite(self.initial_variance) and self.initial_variance > 0):
            raise InvalidArgumentError(
                f"initial_variance must be finite and > 0, got {self.initial_variance}"
            )

    @property
    def prior(self) -> FilterState:
        return FilterState(self.initial_mean, self.initial_variance)


def predict(params: ModelParameters, belief: FilterState, event) -> FilterState:
    """Time update: propagate the belief through one event."""
    event = Event.parse(event)
    mean = params.a * belief.mean + params.b[event.index]
    variance = params.a * params.a * belief.variance + params.q
    return FilterState(mean, variance)


def _dense_update(c, r, mean, var, y):
    # Fallback for zero-variance channels, where the information form is undefined.
    c = np.asarray(c)
    s = var * np.outer(c, c) + np.diag(r)
    if np.linalg.matrix_rank(s) < s.shape[0]:
        raise NumericalDegeneracyError(
            "innovation covariance is singular (zero observation noise with degenerate geometry)"
        )
    gain = np.linalg.solve(s, c * var)
    innovation = y - c * mean
    kc = float(gain @ c)
    new_mean = mean + float(gain @ innovation)
    # Joseph form keeps the variance nonnegative.
    new_var = (1.0 - kc) ** 2 * var + float(gain @ (np.asarray(r) * gain))
    return new_mean, max(new_var, 0.0)


def update(params: ModelParameters, belief: FilterState, observation) -> FilterState:
    """Measurement update from one (phi, pi, upsilon) observation.

    NaN entries in ``observation`` are treated as missing channels.
    """
    y = np.asarray(observation, dtype=float)
    if y.shape != (3,):
        raise InvalidArgumentError(f"observation must have 3 channels, got shape {y.shape}")
    if np.any(np.isinf(y)):
        raise InvalidArgumentError(f"observation must be finite, got {y.tolist()}")
    active = [j for j in range(3) if not math.isnan(y[j])]
    if not active:
        return belief
    c = [params.c[j] for j in active]
    r = [params.r[j] for j in active]
    ys = [float(y[j]) for j in active]
    m, p = belief.mean, belief.variance
    if min(r) <= 0:
        m, p = _dense_update(c, r, m, p, np.array(ys))
        return FilterState(m, p)
    info = 0.0
    h = 0.0
    for cj, rj, yj in zip(c, r, ys):
        info += cj * cj / rj
        h += cj * (yj - cj * m) / rj
    p = p / (1.0 + p * info)
    return FilterState(m + p * h, p)


def filter_step(params: ModelParameters, belief: FilterState, event, observation) -> FilterState:
    return update(params, predict(params, belief, event), observation)


def filter_trajectory(params: ModelParameters, config: FilterConfig, log: TrialLog) -> list:
    """Posterior belief after each step of ``log``, starting from ``config``'s prior."""
    if not isinstance(log, TrialLog) or len(log) == 0:
        raise InvalidArgumentError("filter_trajectory needs a nonempty TrialLog")
    params.require_estimable()
    means, variances = kernels.filter_scan(
        params.a, params.b, params.c, params.q, params.r,
        config.initial_mean, config.initial_variance,
        log.event_indices()[None, :], log.observations()[None, :, :],
    )
    return [FilterState(m, p) for m, p in zip(means[0], variances[0])]


def observation_information(params: ModelParameters) -> float:
    """Fisher information about trust carried by one full observation."""
    params.require_estimable()
    return sum(cj * cj / rj for cj, rj in zip(params.c, params.r))


def steady_state_variance(
    params: ModelParameters,
    *,
    posterior: bool = False,
    tol: float = 1e-12,
    max_iter: int = 10_000_000,
) -> float:
    """Fixed point of the filter's variance recursion.

    By default returns the predicted (prior) variance ``P*`` solving
    ``P = a^2 (P - P c'(c P c' + R)^-1 c P) + q``.  With ``posterior=True``
    returns the matching post-update variance ``P* / (1 + P* info)``.
    """
    info = observation_information(params)
    p, iterations, converged = kernels.riccati_fixed_point(
        params.a, params.q, info, params.q, tol, max_iter
    )
    if not converged:
        raise NonConvergenceError(
            f"variance recursion did not converge to {tol:g} within {iterations} iterations"
        )
    if posterior:
        return p / (1.0 + p * info)
    return p
