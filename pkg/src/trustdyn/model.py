"""Discrete-time trust dynamics and forward simulation.

The latent state is a driver's trust in the automated driving system, on the
1-100 self-report scale.  One time index is one interaction event::

    T(t+1) = a T(t) + b . [L, M, F] + u(t),        u ~ N(0, q)
    y(t)   = c T(t) + w(t),                        w ~ N(0, diag(r))

with ``[L, M, F]`` the one-hot indicator of (true alarm, miss, false alarm)
and ``y = (phi, pi, upsilon)`` the visual focus, NDRT performance and
automation usage measures.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, ValidationError
from . import kernels

TRUST_MIN = 1.0
TRUST_MAX = 100.0

CHANNELS = ("phi", "pi", "upsilon")


class Event(enum.Enum):
    """Interaction event kind; the order matches the input vector [L, M, F]."""

    TRUE_ALARM = "true_alarm"
    MISS = "miss"
    FALSE_ALARM = "false_alarm"

    @property
    def index(self) -> int:
        return _EVENT_INDEX[self]

    def indicator(self) -> np.ndarray:
        out = np.zeros(3)
        out[self.index] = 1.0
        return out

    @classmethod
    def parse(cls, value) -> "Event":
        if isinstance(value, Event):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            legal = ", ".join(e.value for e in cls)
            raise InvalidArgumentError(
                f"unknown event kind {value!r} (expected one of {legal})"
            ) from None

    @classmethod
    def from_indicator(cls, indicator: Sequence[float]) -> "Event":
        """Decode a one-hot [L, M, F] vector; anything else is rejected."""
        vec = np.asarray(indicator, dtype=float)
        if vec.shape != (3,) or not np.all((vec == 0.0) | (vec == 1.0)) or vec.sum() != 1.0:
            raise InvalidArgumentError(
                f"event indicator must be one-hot over [L, M, F], got {vec.tolist()}"
            )
        return _EVENTS_BY_INDEX[int(np.argmax(vec))]


_EVENTS_BY_INDEX = (Event.TRUE_ALARM, Event.MISS, Event.FALSE_ALARM)
_EVENT_INDEX = {e: i for i, e in enumerate(_EVENTS_BY_INDEX)}


def _finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
    return arr


def _triple(name, value) -> tuple:
    arr = _finite(name, value)
    if arr.shape != (3,):
        raise InvalidArgumentError(f"{name} must have 3 entries, got shape {arr.shape}")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class ParameterSEM:
    """Standard errors mirroring the a, b and c entries of ModelParameters."""

    a: float
    b: tuple
    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", _triple("sem.b", self.b))
        object.__setattr__(self, "c", _triple("sem.c", self.c))
        if self.a < 0 or min(self.b) < 0 or min(self.c) < 0:
            raise InvalidArgumentError("standard errors must be nonnegative")


@dataclass(frozen=True)
class ModelParameters:
    """Matrices of the trust state-space model.

    Attributes
    ----------
    a : float
        State-transition coefficient.
    b : tuple of 3 floats
        Trust change per event, ordered (true alarm, miss, false alarm).
    c : tuple of 3 floats
        Observation gain per trust point, ordered (phi, pi, upsilon).
    q : float
        Process-noise variance, trust points squared.
    r : tuple of 3 floats
        Diagonal of the observation-noise covariance.
    sem : ParameterSEM, optional
        Standard errors for a, b and c.
    """

    a: float
    b: tuple
    c: tuple
    q: float
    r: tuple
    sem: Optional[ParameterSEM] = field(default=None, compare=False)

    def __post_init__(self):
        a = float(_finite("a", self.a))
        q = float(_finite("q", self.q))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "b", _triple("b", self.b))
        object.__setattr__(self, "c", _triple("c", self.c))
        object.__setattr__(self, "r", _triple("r", self.r))
        if q < 0:
            raise InvalidArgumentError(f"process-noise variance q must be >= 0, got {q}")
        if min(self.r) < 0:
            raise InvalidArgumentError(f"observation-noise variances r must be >= 0, got {self.r}")

    @property
    def b_vec(self) -> np.ndarray:
        return np.array(self.b)

    @property
    def c_vec(self) -> np.ndarray:
        return np.array(self.c)

    @property
    def r_vec(self) -> np.ndarray:
        return np.array(self.r)

    def require_estimable(self) -> None:
        """Raise unless every observation-noise variance is strictly positive."""
        if min(self.r) <= 0:
            raise InvalidArgumentError(
                f"estimation needs every r entry > 0 (invertible noise covariance), got {self.r}"
            )

    def scaled(self, *, q: float = 1.0, r: float = 1.0) -> "ModelParameters":
        """Copy with the noise variances multiplied by the given factors."""
        return replace(self, q=self.q * q, r=tuple(v * r for v in self.r))

    def to_dict(self) -> dict:
        out = {"a": self.a, "b": list(self.b), "c": list(self.c), "q": self.q, "r": list(self.r)}
        if self.sem is not None:
            out["sem"] = {"a": self.sem.a, "b": list(self.sem.b), "c": list(self.sem.c)}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParameters":
        sem = data.get("sem")
        return cls(
            a=data["a"],
            b=data["b"],
            c=data["c"],
            q=data["q"],
            r=data["r"],
            sem=None if sem is None else ParameterSEM(**sem),
        )


#: Published point estimates and standard errors of the mean for the model.
TABLE1 = ModelParameters(
    a=1.00,
    b=(0.224, -0.670, -0.798),
    c=(7.01e-3, 4.23e-3, 9.20e-3),
    q=0.26,
    r=(0.18, 0.07, 0.06),
    sem=ParameterSEM(a=0.25, b=(0.079, 0.084, 0.083), c=(3.6e-4, 1.3e-4, 1.0e-4)),
)

PRESETS = {"table1": TABLE1}


def get_preset(name: str) -> ModelParameters:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown parameter preset {name!r} (known: {', '.join(sorted(PRESETS))})"
        ) from None


@dataclass(frozen=True)
class Step:
    """One logged interaction event.

    ``observation`` holds (phi, pi, upsilon); a NaN entry marks a missing
    channel.  ``reported_trust`` is None when no self-report was taken and
    ``latent_trust`` is only known for simulated data.
    """

    event: Event
    reported_trust: Optional[float]
    observation: tuple
    latent_trust: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "event", Event.parse(self.event))
        obs = np.asarray(self.observation, dtype=float)
        if obs.shape != (3,):
            raise InvalidArgumentError(f"observation must have 3 channels, got {obs.shape}")
        if np.any(np.isinf(obs)):
            raise InvalidArgumentError(f"observation must be finite, got {obs.tolist()}")
        object.__setattr__(self, "observation", tuple(float(v) for v in obs))
        if self.reported_trust is not None:
            rt = float(self.reported_trust)
            if not TRUST_MIN <= rt <= TRUST_MAX:
                raise ValidationError(
                    f"reported trust {rt} outside [{TRUST_MIN:g}, {TRUST_MAX:g}]", "reported_trust"
                )
            object.__setattr__(self, "reported_trust", rt)
        if self.latent_trust is not None:
            object.__setattr__(self, "latent_trust", float(_finite("latent_trust", self.latent_trust)))


@dataclass(frozen=True)
class TrialLog:
    participant_id: str
    trial_id: str
    steps: tuple

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise InvalidArgumentError("a trial log needs at least one step")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "participant_id", str(self.participant_id))
        object.__setattr__(self, "trial_id", str(self.trial_id))

    def __len__(self):
        return len(self.steps)

    @property
    def events(self) -> list:
        return [s.event for s in self.steps]

    def event_indices(self) -> np.ndarray:
        return np.array([s.event.index for s in self.steps], dtype=np.intp)

    def observations(self) -> np.ndarray:
        """(n_steps, 3) array; NaN marks a missing channel."""
        return np.array([s.observation for s in self.steps], dtype=float)

    def reported(self) -> np.ndarray:
        return np.array(
            [np.nan if s.reported_trust is None else s.reported_trust for s in self.steps]
        )

    def latent(self) -> Optional[np.ndarray]:
        if any(s.latent_trust is None for s in self.steps):
            return None
        return np.array([s.latent_trust for s in self.steps])


def clamp_report(t_value: float) -> float:
    """Saturate a latent trust value onto the 1-100 self-report scale."""
    return min(TRUST_MAX, max(TRUST_MIN, float(t_value)))


def step_state(params: ModelParameters, state: float, event, noise_u: float = 0.0) -> float:
    """Advance latent trust by one event.

    Pass ``noise_u=0`` for deterministic propagation or a draw from N(0, q).
    """
    state = float(_finite("state", state))
    noise_u = float(_finite("noise_u", noise_u))
    event = Event.parse(event)
    return params.a * state + params.b[event.index] + noise_u


def emit_observation(params: ModelParameters, state: float, noise_w=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Behavioral measures (phi, pi, upsilon) produced by trust ``state``."""
    state = float(_finite("state", state))
    noise_w = _finite("noise_w", noise_w)
    if noise_w.shape != (3,):
        raise InvalidArgumentError(f"noise_w must have 3 entries, got shape {noise_w.shape}")
    return params.c_vec * state + noise_w


def draw_noise(params: ModelParameters, rng: np.random.Generator, n_steps: int):
    """Sample process noise (n_steps,) and observation noise (n_steps, 3)."""
    u = rng.standard_normal(n_steps) * math.sqrt(params.q)
    w = rng.standard_normal((n_steps, 3)) * np.sqrt(params.r_vec)
    return u, w


def rollout(params: ModelParameters, initial_trust: float, events, noise_u=None, noise_w=None):
    """Latent trajectory and observations for given noise sequences.

    ``events`` may be Event values or an integer array of [L, M, F] indices.
    Returns ``(latent, observations)`` with shapes (n,) and (n, 3); the state
    after event ``t`` is the one observed at step ``t``.
    """
    if isinstance(events, np.ndarray) and events.dtype.kind in "iu":
        idx = events.astype(np.intp)
    else:
        idx = np.array([Event.parse(e).index for e in events], dtype=np.intp)
    n = idx.size
    u = np.zeros(n) if noise_u is None else np.asarray(noise_u, dtype=float)
    latent = kernels.latent_scan(params.a, params.b_vec, float(initial_trust), idx, u)
    obs = latent[:, None] * params.c_vec
    if noise_w is not None:
        obs = obs + np.asarray(noise_w, dtype=float)
    return latent, obs


def simulate_trial(
    params: ModelParameters,
    initial_trust: float,
    events: Iterable,
    seed=0,
    stochastic: bool = True,
    participant_id: str = "p0",
    trial_id: str = "t0",
) -> TrialLog:
    """Forward-simulate one trial.

    Each event is applied with :func:`step_state` and the resulting state is
    observed with :func:`emit_observation`.  With ``stochastic`` the noises
    are drawn from a generator seeded by ``seed`` (an int or a sequence of
    ints), so identical inputs give identical logs.
    """
    events = [Event.parse(e) for e in events]
    if not events:
        raise InvalidArgumentError("simulate_trial needs a nonempty event list")
    initial_trust = float(_finite("initial_trust", initial_trust))
    if stochastic:
        u, w = draw_noise(params, np.random.default_rng(seed), len(events))
    else:
        u, w = None, None
    latent, obs = rollout(params, initial_trust, events, u, w)
    steps = tuple(
        Step(event=e, reported_trust=clamp_report(t), observation=tuple(y), latent_trust=float(t))
        for e, t, y in zip(events, latent, obs)
    )
    return TrialLog(participant_id=participant_id, trial_id=trial_id, steps=steps)


def simulate_cohort(
    params: ModelParameters,
    trials: Sequence[Sequence],
    n_participants: int,
    initial_trust: float,
    seed=0,
    *,
    initial_spread: float = 0.0,
    stochastic: bool = True,
    trial_ids: Optional[Sequence[str]] = None,
) -> list:
    """Simulate every trial schedule for ``n_participants`` participants.

    Each participant starts every trial from the same initial trust, drawn
    uniformly from ``initial_trust +/- initial_spread``.  Participant ``p``
    and trial ``k`` use streams derived from ``(seed, p)`` and
    ``(seed, p, k)``, so adding participants never changes earlier ones.
    """
    if n_participants < 1:
        raise InvalidArgumentError(f"n_participants must be >= 1, got {n_participants}")
    if not trials:
        raise InvalidArgumentError("need at least one trial schedule")
    if trial_ids is None:
        trial_ids = [f"t{k}" for k in range(len(trials))]
    if len(trial_ids) != len(trials):
        raise InvalidArgumentError("trial_ids must match the number of trial schedules")
    width = len(str(n_participants - 1))
    logs = []
    for p in range(n_participants):
        start = float(initial_trust)
        if initial_spread:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, p)))
            start += rng.uniform(-initial_spread, initial_spread)
        for k, events in enumerate(trials):
            logs.append(
                simulate_trial(
                    params, start, events,
                    seed=np.random.SeedSequence(seed, spawn_key=(3, p, k)),
                    stochastic=stochastic,
                    participant_id=f"p{p:0{width}d}",
                    trial_id=trial_ids[k],
                )
            )
    return logs
