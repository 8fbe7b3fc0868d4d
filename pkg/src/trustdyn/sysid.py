"""Recover model parameters from a corpus of trial logs.

Dynamics are fitted by regressing ``T(t+1)`` on ``T(t)`` and the event
indicators with a per-participant random intercept.  Instead of a full
REML fit, a two-stage scheme is used:

1. pooled least squares without intercepts;
2. participant means of the residuals are shrunk toward zero by the usual
   random-effects factor ``n_i s_a^2 / (n_i s_a^2 + s^2)`` (moment estimate
   of the intercept variance ``s_a^2``), centred, subtracted from the
   response, and the regression is refitted.  Step 2 repeats until the
   intercepts move by less than ``tol``.

The observation gains are three regressions of each channel on reported
trust through the origin.  Standard errors are the ordinary least-squares
ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDesignError, InvalidArgumentError, NonConvergenceError
from .model import CHANNELS, ModelParameters, ParameterSEM, TrialLog

DYNAMICS_REGRESSORS = ("trust(t)", "true_alarm", "miss", "false_alarm")


@dataclass(frozen=True)
class DynamicsFit:
    a: float
    b: tuple
    q: float
    sem_a: float
    sem_b: tuple
    intercepts: dict
    shrinkage: dict
    intercept_variance: float
    n_rows: int
    iterations: int


@dataclass(frozen=True)
class ObservationFit:
    c: tuple
    r: tuple
    sem_c: tuple
    n_rows: tuple


@dataclass(frozen=True)
class FitResult:
    """Point estimates, standard errors and residual variances of a fit."""

    params: ModelParameters
    sem: ParameterSEM
    residual_variances: dict
    n_observations: int
    per_participant_intercepts: dict
    dynamics: DynamicsFit = field(repr=False)
    observation: ObservationFit = field(repr=False)


def _canonical(logs) -> list:
    logs = list(logs)
    if not logs:
        raise InvalidArgumentError("no trial logs given")
    for log in logs:
        if not isinstance(log, TrialLog):
            raise InvalidArgumentError(f"expected TrialLog, got {type(log).__name__}")
    logs.sort(key=lambda g: (g.participant_id, g.trial_id))
    for prev, cur in zip(logs, logs[1:]):
        if (prev.participant_id, prev.trial_id) == (cur.participant_id, cur.trial_id):
            raise InvalidArgumentError(
                f"duplicate trial {cur.trial_id!r} for participant {cur.participant_id!r}"
            )
    return logs


def dynamics_design(logs):
    """Regression rows ``(participants, X, y)`` from consecutive reported-trust pairs."""
    pids, rows, ys = [], [], []
    for log in _canonical(logs):
        reported = log.reported()
        idx = log.event_indices()
        for k in range(1, len(log)):
            if np.isnan(reported[k - 1]) or np.isnan(reported[k]):
                continue
            x = np.zeros(4)
            x[0] = reported[k - 1]
            x[1 + idx[k]] = 1.0
            pids.append(log.participant_id)
            rows.append(x)
            ys.append(reported[k])
    return pids, np.array(rows).reshape(-1, 4), np.array(ys)


def _check_rank(x, names):
    for j, name in enumerate(names):
        if not np.any(x[:, j] != 0):
            raise DegenerateDesignError(f"regressor {name!r} never varies from zero in the design")
    rank = np.linalg.matrix_rank(x)
    if rank == x.shape[1]:
        return
    for j, name in enumerate(names):
        if np.linalg.matrix_rank(np.delete(x, j, axis=1)) == rank:
            raise DegenerateDesignError(f"design is rank deficient: regressor {name!r} is collinear")
    raise DegenerateDesignError("design is rank deficient")


def _lstsq(x, y):
    return np.linalg.lstsq(x, y, rcond=None)[0]


def fit_dynamics(logs, *, tol: float = 1e-8, max_iter: int = 10_000) -> DynamicsFit:
    """Fit ``a``, ``b`` and ``q`` with random participant intercepts."""
    pids, x, y = dynamics_design(logs)
    groups, group_of = np.unique(np.array(pids, dtype=object).astype(str), return_inverse=True)
    counts = np.bincount(group_of, minlength=len(groups))
    if len(groups) < 2:
        raise InvalidArgumentError(f"need at least 2 participants with trust pairs, got {len(groups)}")
    if counts.min() < 2:
        bad = groups[int(np.argmin(counts))]
        raise InvalidArgumentError(f"participant {bad!r} has fewer than 2 consecutive trust pairs")
    _check_rank(x, DYNAMICS_REGRESSORS)
    n, p = x.shape
    if n <= p:
        raise DegenerateDesignError(f"{n} rows cannot identify {p} regressors")

    beta = _lstsq(x, y)
    alpha = np.zeros(len(groups))
    shrink = np.zeros(len(groups))
    var_alpha = 0.0
    for iteration in range(1, max_iter + 1):
        resid = y - x @ beta
        means = np.bincount(group_of, resid, minlength=len(groups)) / counts
        within = resid - alpha[group_of]
        s2 = float(within @ within) / (n - p)
        var_alpha = max(0.0, float(np.var(means, ddof=1) - np.mean(s2 / counts)))
        denom = counts * var_alpha + s2
        shrink = np.divide(counts * var_alpha, denom, out=np.zeros(len(groups)), where=denom > 0)
        new_alpha = shrink * means
        new_alpha -= np.average(new_alpha, weights=counts)
        beta = _lstsq(x, y - new_alpha[group_of])
        delta = float(np.max(np.abs(new_alpha - alpha)))
        alpha = new_alpha
        if delta < tol:
            break
    else:
        raise NonConvergenceError(f"random intercepts did not converge within {max_iter} iterations")

    resid = y - x @ beta - alpha[group_of]
    q = float(resid @ resid) / (n - p)
    cov = q * np.linalg.inv(x.T @ x)
    sem = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return DynamicsFit(
        a=float(beta[0]),
        b=tuple(float(v) for v in beta[1:]),
        q=q,
        sem_a=float(sem[0]),
        sem_b=tuple(float(v) for v in sem[1:]),
        intercepts={str(g): float(v) for g, v in zip(groups, alpha)},
        shrinkage={str(g): float(v) for g, v in zip(groups, shrink)},
        intercept_variance=var_alpha,
        n_rows=n,
        iterations=iteration,
    )


def fit_observation(logs) -> ObservationFit:
    """Fit the observation gains ``c`` and noise variances ``r``."""
    logs = _canonical(logs)
    trust = np.concatenate([g.reported() for g in logs])
    obs = np.concatenate([g.observations() for g in logs])
    c, r, sem, rows = [], [], [], []
    for j, name in enumerate(CHANNELS):
        keep = ~np.isnan(trust) & ~np.isnan(obs[:, j])
        t, yj = trust[keep], obs[keep, j]
        if t.size < 2:
            raise DegenerateDesignError(f"channel {name!r} has fewer than 2 usable rows")
        if np.ptp(t) == 0:
            raise DegenerateDesignError(
                f"reported trust has zero variance; gain for {name!r} is not identifiable"
            )
        sxx = float(t @ t)
        cj = float(t @ yj) / sxx
        e = yj - cj * t
        rj = float(e @ e) / (t.size - 1)
        c.append(cj)
        r.append(rj)
        sem.append((rj / sxx) ** 0.5)
        rows.append(int(t.size))
    return ObservationFit(c=tuple(c), r=tuple(r), sem_c=tuple(sem), n_rows=tuple(rows))


def fit_all(logs, **kwargs) -> FitResult:
    logs = _canonical(logs)
    dyn = fit_dynamics(logs, **kwargs)
    obs = fit_observation(logs)
    sem = ParameterSEM(a=dyn.sem_a, b=dyn.sem_b, c=obs.sem_c)
    params = ModelParameters(a=dyn.a, b=dyn.b, c=obs.c, q=dyn.q, r=obs.r, sem=sem)
    return FitResult(
        params=params,
        sem=sem,
        residual_variances={"q": dyn.q, "r": obs.r},
        n_observations=dyn.n_rows + sum(obs.n_rows),
        per_participant_intercepts=dict(dyn.intercepts),
        dynamics=dyn,
        observation=obs,
    )
