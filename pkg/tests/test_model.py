import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trustdyn import (
    TABLE1,
    Event,
    InvalidArgumentError,
    ModelParameters,
    clamp_report,
    emit_observation,
    simulate_trial,
    step_state,
)
from trustdyn.model import draw_noise, simulate_cohort

ZERO_GAIN = dataclasses.replace(TABLE1, b=(0.0, 0.0, 0.0))


@pytest.mark.parametrize(
    "event, expected",
    [(Event.TRUE_ALARM, 50.224), (Event.MISS, 49.330), (Event.FALSE_ALARM, 49.202)],
)
def test_step_state_table1(event, expected):
    assert step_state(TABLE1, 50.0, event, 0.0) == pytest.approx(expected, abs=1e-12)


def test_step_state_adds_noise():
    assert step_state(TABLE1, 50.0, "true_alarm", 0.5) == pytest.approx(50.724, abs=1e-12)


@pytest.mark.parametrize("event", list(Event))
def test_zero_gain_is_identity(event):
    assert step_state(ZERO_GAIN, 37.5, event, 0.0) == 37.5


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_step_state_rejects_non_finite(bad):
    with pytest.raises(InvalidArgumentError):
        step_state(TABLE1, bad, Event.MISS, 0.0)
    with pytest.raises(InvalidArgumentError):
        step_state(TABLE1, 50.0, Event.MISS, bad)


@pytest.mark.parametrize(
    "trust, expected",
    [(50.0, (0.3505, 0.2115, 0.4600)), (100.0, (0.701, 0.423, 0.920)), (0.0, (0.0, 0.0, 0.0))],
)
def test_emit_observation(trust, expected):
    np.testing.assert_allclose(emit_observation(TABLE1, trust), expected, rtol=0, atol=1e-12)


def test_emit_observation_rejects_non_finite_noise():
    with pytest.raises(InvalidArgumentError):
        emit_observation(TABLE1, 50.0, [0.0, math.nan, 0.0])


@pytest.mark.parametrize("value, expected", [(50.0, 50.0), (120.3, 100.0), (-4.0, 1.0), (1.0, 1.0)])
def test_clamp_report(value, expected):
    assert clamp_report(value) == expected


def test_event_encoding_is_one_hot():
    for e in Event:
        vec = e.indicator()
        assert vec.sum() == 1.0 and Event.from_indicator(vec) is e
    assert [e.index for e in Event] == [0, 1, 2]
    with pytest.raises(InvalidArgumentError):
        Event.from_indicator([1, 1, 0])
    with pytest.raises(InvalidArgumentError):
        Event.parse("near_miss")


def test_parameter_validation():
    with pytest.raises(InvalidArgumentError):
        ModelParameters(a=1, b=(0, 0, 0), c=(1, 1, 1), q=-0.1, r=(1, 1, 1))
    with pytest.raises(InvalidArgumentError):
        ModelParameters(a=1, b=(0, 0, 0), c=(1, 1, 1), q=0.1, r=(1, -1, 1))
    with pytest.raises(InvalidArgumentError):
        ModelParameters(a=1, b=(0, 0), c=(1, 1, 1), q=0.1, r=(1, 1, 1))
    zero_r = ModelParameters(a=1, b=(0, 0, 0), c=(1, 1, 1), q=0.1, r=(1, 0, 1))
    with pytest.raises(InvalidArgumentError):
        zero_r.require_estimable()


def test_simulate_deterministic_true_alarms():
    log = simulate_trial(TABLE1, 50.0, [Event.TRUE_ALARM] * 12, stochastic=False)
    assert log.latent()[-1] == pytest.approx(52.688, abs=1e-9)
    assert len(log) == 12


def test_simulate_deterministic_miss_false_alarm():
    log = simulate_trial(TABLE1, 50.0, [Event.MISS, Event.FALSE_ALARM], stochastic=False)
    assert log.latent()[-1] == pytest.approx(48.532, abs=1e-9)


def test_simulate_deterministic_equals_composition(mixed_schedule):
    log = simulate_trial(TABLE1, 42.0, mixed_schedule, stochastic=False)
    t = 42.0
    for step, event in zip(log.steps, mixed_schedule):
        t = step_state(TABLE1, t, event, 0.0)
        assert step.latent_trust == t
        assert step.observation == tuple(emit_observation(TABLE1, t))
        assert step.reported_trust == clamp_report(t)


def test_simulate_seeded_repeatable(mixed_schedule):
    a = simulate_trial(TABLE1, 50.0, mixed_schedule, seed=11)
    b = simulate_trial(TABLE1, 50.0, mixed_schedule, seed=11)
    c = simulate_trial(TABLE1, 50.0, mixed_schedule, seed=12)
    assert a == b
    assert repr(a).encode() == repr(b).encode()
    assert a != c


def test_simulate_empty_events():
    with pytest.raises(InvalidArgumentError):
        simulate_trial(TABLE1, 50.0, [], seed=0)


def test_reported_trust_is_clamped_but_latent_is_not():
    low = simulate_trial(TABLE1, 1.5, [Event.FALSE_ALARM] * 3, stochastic=False)
    assert low.latent()[-1] < 1.0
    assert all(s.reported_trust >= 1.0 for s in low.steps)


@given(
    t1=st.floats(-200, 200), t2=st.floats(-200, 200), alpha=st.floats(-3, 3),
    event=st.sampled_from(list(Event)),
)
def test_step_state_is_affine(t1, t2, alpha, event):
    # f(alpha t1 + (1 - alpha) t2) == alpha f(t1) + (1 - alpha) f(t2)
    lhs = step_state(TABLE1, alpha * t1 + (1 - alpha) * t2, event, 0.0)
    rhs = alpha * step_state(TABLE1, t1, event, 0.0) + (1 - alpha) * step_state(TABLE1, t2, event, 0.0)
    assert lhs == pytest.approx(rhs, abs=1e-12 * (1 + abs(t1) + abs(t2)) * (1 + abs(alpha)) * 10)


@given(st.lists(st.sampled_from(list(Event)), min_size=1, max_size=30), st.floats(1, 100))
@settings(max_examples=50)
def test_constant_trust_without_gain_or_noise(events, t0):
    ident = dataclasses.replace(ZERO_GAIN, q=0.0)
    log = simulate_trial(ident, t0, events, stochastic=False)
    assert np.all(log.latent() == t0)


def test_process_noise_moments():
    n = 10**5
    u, w = draw_noise(TABLE1, np.random.default_rng(2024), n)
    assert abs(u.mean()) < 4 * math.sqrt(TABLE1.q / n)
    assert abs(u.var() / TABLE1.q - 1) < 0.05
    np.testing.assert_allclose(w.var(axis=0) / TABLE1.r_vec, 1.0, atol=0.05)


def test_cohort_streams_are_stable_under_growth(mixed_schedule):
    small = simulate_cohort(TABLE1, [mixed_schedule], 3, 50.0, seed=5, initial_spread=10)
    large = simulate_cohort(TABLE1, [mixed_schedule], 5, 50.0, seed=5, initial_spread=10)
    assert [log.steps for log in small] == [log.steps for log in large[:3]]
    assert len({log.steps[0].latent_trust for log in large}) == 5
