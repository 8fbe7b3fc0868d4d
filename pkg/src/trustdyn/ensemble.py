"""Monte Carlo estimate bands from repeated noisy filter runs."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgumentError
from .estimator import FilterConfig
from .model import Event, ModelParameters, draw_noise, rollout

RESAMPLE = "resample"
FIXED_RECORD = "fixed_record"


@dataclass(frozen=True)
class EnsembleResult:
    """Estimate trajectories of every run plus their pointwise envelope.

    ``runs`` and ``truths`` are (n_runs, n_steps); the rest are (n_steps,).
    ``best_estimate`` filters the noise-free record and ``best_truth`` is the
    noise-free latent rollout.
    """

    events: tuple
    runs: np.ndarray
    variances: np.ndarray
    truths: np.ndarray
    band_lower: np.ndarray
    band_upper: np.ndarray
    best_estimate: np.ndarray
    best_variance: np.ndarray
    best_truth: np.ndarray

    @property
    def n_runs(self) -> int:
        return self.runs.shape[0]

    @property
    def n_steps(self) -> int:
        return self.runs.shape[1]

    @property
    def band_width(self) -> np.ndarray:
        return self.band_upper - self.band_lower


def _parse_band_mode(mode):
    if mode is None or mode == "minmax":
        return None
    if isinstance(mode, str):
        if not mode.startswith("percentile"):
            raise InvalidArgumentError(f"unknown band mode {mode!r}")
        _, _, value = mode.partition(":")
        try:
            p = float(value) if value else 0.05
        except ValueError:
            raise InvalidArgumentError(f"bad percentile in band mode {mode!r}") from None
    else:
        p = float(mode)
    if not 0.0 < p < 0.5:
        raise InvalidArgumentError(f"percentile must lie in (0, 0.5), got {p}")
    return p


def compute_bands(runs, mode="minmax"):
    """Pointwise envelope of estimate trajectories.

    ``mode`` is ``"minmax"`` (default), ``"percentile:p"`` or a float ``p``
    selecting the [p, 1 - p] quantile envelope.
    """
    try:
        arr = np.asarray(runs, dtype=float)
    except ValueError:
        raise InvalidArgumentError("trajectories must share one length") from None
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidArgumentError(
            f"expected a nonempty (n_runs, n_steps) array of trajectories, got shape {arr.shape}"
        )
    p = _parse_band_mode(mode)
    if p is None:
        return arr.min(axis=0), arr.max(axis=0)
    return np.quantile(arr, p, axis=0), np.quantile(arr, 1.0 - p, axis=0)


def _run_seed(seed, k):
    return np.random.SeedSequence(seed, spawn_key=(0, k))


def _record_seed(seed):
    return np.random.SeedSequence(seed, spawn_key=(1,))


def _simulate_block(params, idx, truth_initial, seed, run_ids, mode, record):
    n_steps = idx.size
    truths = np.empty((len(run_ids), n_steps))
    obs = np.empty((len(run_ids), n_steps, 3))
    inject = np.zeros((len(run_ids), n_steps))
    for i, k in enumerate(run_ids):
        rng = np.random.default_rng(_run_seed(seed, k))
        u, w = draw_noise(params, rng, n_steps)
        if mode == RESAMPLE:
            truths[i], obs[i] = rollout(params, truth_initial, idx, u, w)
        else:
            truths[i], obs[i] = record[0], record[1] + w
            inject[i] = u
    return truths, obs, inject


def run_ensemble(
    params: ModelParameters,
    config: FilterConfig,
    scenario_events,
    truth_initial: float,
    n_runs: int = 100,
    seed=0,
    *,
    mode: str = RESAMPLE,
    band_mode="minmax",
    workers: int = 1,
) -> EnsembleResult:
    """Filter ``n_runs`` noisy realisations of one event schedule.

    In ``"resample"`` mode every run draws fresh process and observation
    noise, so both the latent truth and the observations differ per run.  In
    ``"fixed_record"`` mode one stochastic record is shared and each run
    perturbs the filter itself: a process-noise draw is added to every
    predicted mean and an observation-noise draw to every observation fed in.

    ``seed`` is an int or a tuple of ints.  Run ``k`` draws from a stream
    derived from ``(seed, k)``, so the result does not depend on ``workers``.
    The envelope is widened where needed to contain ``best_estimate``.
    """
    if n_runs < 2:
        raise InvalidArgumentError(f"n_runs must be >= 2, got {n_runs}")
    if mode not in (RESAMPLE, FIXED_RECORD):
        raise InvalidArgumentError(f"unknown ensemble mode {mode!r}")
    if workers < 1:
        raise InvalidArgumentError(f"workers must be >= 1, got {workers}")
    events = tuple(Event.parse(e) for e in scenario_events)
    if not events:
        raise InvalidArgumentError("scenario needs at least one event")
    params.require_estimable()
    _parse_band_mode(band_mode)
    idx = np.array([e.index for e in events], dtype=np.intp)
    n_steps = idx.size
    truth_initial = float(truth_initial)

    best_truth, best_obs = rollout(params, truth_initial, idx)
    record = None
    if mode == FIXED_RECORD:
        u, w = draw_noise(params, np.random.default_rng(_record_seed(seed)), n_steps)
        record = rollout(params, truth_initial, idx, u, w)

    def block(run_ids):
        truths, obs, inject = _simulate_block(params, idx, truth_initial, seed, run_ids, mode, record)
        means, variances = kernels.filter_scan(
            params.a, params.b, params.c, params.q, params.r,
            config.initial_mean, config.initial_variance,
            np.broadcast_to(idx, (len(run_ids), n_steps)), obs, inject,
        )
        return truths, means, variances

    chunks = [c for c in np.array_split(np.arange(n_runs), workers) if c.size]
    if len(chunks) == 1:
        parts = [block(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(block, chunks))
    truths = np.concatenate([p[0] for p in parts])
    runs = np.concatenate([p[1] for p in parts])
    variances = np.concatenate([p[2] for p in parts])

    best_mean, best_var = kernels.filter_scan(
        params.a, params.b, params.c, params.q, params.r,
        config.initial_mean, config.initial_variance, idx[None, :], best_obs[None, :, :],
    )
    best_mean, best_var = best_mean[0], best_var[0]
    lower, upper = compute_bands(runs, band_mode)
    return EnsembleResult(
        events=events,
        runs=runs,
        variances=variances,
        truths=truths,
        band_lower=np.minimum(lower, best_mean),
        band_upper=np.maximum(upper, best_mean),
        best_estimate=best_mean,
        best_variance=best_var,
        best_truth=best_truth,
    )
