import dataclasses

import numpy as np
import pytest

from trustdyn import TABLE1, Event, FilterConfig, InvalidArgumentError, compute_bands, run_ensemble

TWELVE_TA = [Event.TRUE_ALARM] * 12


def test_compute_bands_identical_runs():
    traj = np.linspace(40, 60, 12)
    lo, hi = compute_bands([traj] * 100)
    assert np.array_equal(lo, traj) and np.array_equal(hi, traj)


def test_compute_bands_two_constants():
    lo, hi = compute_bands([np.full(5, 10.0), np.full(5, 20.0)])
    assert np.all(lo == 10.0) and np.all(hi == 20.0)


def test_compute_bands_rejects_ragged():
    with pytest.raises(InvalidArgumentError):
        compute_bands([[1.0, 2.0], [1.0]])
    with pytest.raises(InvalidArgumentError):
        compute_bands([])
    with pytest.raises(InvalidArgumentError):
        compute_bands([[1.0, 2.0]], mode="percentile:0.7")


@pytest.mark.parametrize("p", [0.01, 0.05, 0.25, 0.49])
def test_percentile_band_nested_in_minmax(mixed_schedule, p):
    res = run_ensemble(TABLE1, FilterConfig(50.0, 4.0), mixed_schedule, 50.0, 100, seed=3)
    lo, hi = compute_bands(res.runs)
    plo, phi = compute_bands(res.runs, mode=f"percentile:{p}")
    assert np.all(lo <= plo) and np.all(phi <= hi) and np.all(plo <= phi)


def test_noise_free_collapse(mixed_schedule):
    # r * 1e-12 leaves an observation spread of ~1e-4 over 50 runs; go closer to the limit.
    params = dataclasses.replace(TABLE1, q=0.0).scaled(r=1e-14)
    res = run_ensemble(params, FilterConfig(50.0, 1.0), mixed_schedule, 50.0, 50, seed=1)
    assert np.all(res.band_width < 1e-4)


def test_seeded_determinism(mixed_schedule):
    a = run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 100, seed=9)
    b = run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 100, seed=9)
    for field in dataclasses.fields(a):
        assert np.array_equal(getattr(a, field.name), getattr(b, field.name))


@pytest.mark.parametrize("mode", ["resample", "fixed_record"])
@pytest.mark.parametrize("workers", [2, 3, 8])
def test_parallelism_does_not_change_results(mixed_schedule, mode, workers):
    serial = run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 37, seed=4, mode=mode)
    par = run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 37, seed=4, mode=mode, workers=workers)
    assert serial.runs.tobytes() == par.runs.tobytes()
    assert serial.band_lower.tobytes() == par.band_lower.tobytes()


def test_final_band_width_in_calibrated_range():
    res = run_ensemble(TABLE1, FilterConfig(50.0, 1.0), TWELVE_TA, 50.0, 100, seed=7)
    assert 0.5 < res.band_width[-1] < 10.0


def test_band_contains_runs_and_best(mixed_schedule):
    res = run_ensemble(TABLE1, FilterConfig(45.0, 20.0), mixed_schedule, 50.0, 100, seed=2)
    assert np.all(res.band_lower <= res.best_estimate) and np.all(res.best_estimate <= res.band_upper)
    assert np.all(res.runs >= res.band_lower) and np.all(res.runs <= res.band_upper)
    assert res.runs.shape == res.truths.shape == (100, 12)


def test_minmax_width_monotone_in_runs(mixed_schedule):
    res = run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 100, seed=5)
    prev = np.zeros(res.n_steps)
    for n in (2, 5, 10, 25, 50, 100):
        lo, hi = compute_bands(res.runs[:n])
        assert np.all(hi - lo >= prev)
        prev = hi - lo


def test_fixed_record_shares_truth(mixed_schedule):
    res = run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 20, seed=5, mode="fixed_record")
    assert np.all(res.truths == res.truths[0])
    assert np.ptp(res.runs[:, -1]) > 0
    resampled = run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 20, seed=5)
    assert np.ptp(resampled.truths[:, -1]) > 0


def test_run_prefix_is_stable(mixed_schedule):
    small = run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 10, seed=5)
    large = run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 30, seed=5)
    assert np.array_equal(small.runs, large.runs[:10])


def test_argument_errors(mixed_schedule):
    with pytest.raises(InvalidArgumentError):
        run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 1, seed=0)
    with pytest.raises(InvalidArgumentError):
        run_ensemble(TABLE1, FilterConfig(), mixed_schedule, 50.0, 10, seed=0, mode="bogus")
    with pytest.raises(InvalidArgumentError):
        run_ensemble(TABLE1, FilterConfig(), [], 50.0, 10, seed=0)
