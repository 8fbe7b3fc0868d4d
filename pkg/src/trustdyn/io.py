"""File formats: scenario and parameter JSON, trial-log CSV, results CSV.

Scenario file (JSON)::

    {
      "initial_trust": 50,
      "params": "table1",            # preset name or an inline parameter object
      "participants": 1,             # optional
      "initial_spread": 0,           # optional, +/- uniform spread of initial trust
      "trials": [{"id": "straight", "events": ["true_alarm", "miss", ...]}, ...]
    }

Parameter file (JSON): ``{"a", "b", "c", "q", "r"}`` with optional ``"sem"``
and free-form ``"meta"``; the same object is accepted inline as a scenario's
``"params"``.

Trial logs are CSV with the header ``participant_id, trial_id, event_index,
event_type, reported_trust, phi, pi, upsilon`` and an optional trailing
``latent_trust`` column for simulated data.  Empty observation cells mark
missing channels.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .ensemble import EnsembleResult
from .errors import InvalidArgumentError, ValidationError
from .estimator import FilterConfig, FilterState
from .model import (
    CHANNELS,
    TRUST_MAX,
    TRUST_MIN,
    Event,
    ModelParameters,
    ParameterSEM,
    Step,
    TrialLog,
    get_preset,
)
from .sysid import FitResult

LOG_COLUMNS = ("participant_id", "trial_id", "event_index", "event_type", "reported_trust") + CHANNELS
LATENT_COLUMN = "latent_trust"
RESULT_COLUMNS = (
    "step", "event_type", "truth", "reported_trust",
    "estimate_mean", "estimate_variance", "band_lower", "band_upper",
)

_PARAM_KEYS = {"a", "b", "c", "q", "r", "sem", "meta"}
_SEM_KEYS = {"a", "b", "c"}
_SCENARIO_KEYS = {"initial_trust", "params", "participants", "initial_spread", "trials"}
_TRIAL_KEYS = {"id", "events"}


def fmt(x) -> str:
    """17 significant digits, empty for missing values."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Scenario:
    trials: tuple
    initial_trust: float
    params: ModelParameters
    params_ref: str = "inline"
    trial_ids: tuple = ()
    participants: int = 1
    initial_spread: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    n_runs: int = 100
    initial_mean: Optional[float] = None
    initial_variance: float = FilterConfig().initial_variance
    band_mode: str = "minmax"
    out: Optional[str] = None

    def __post_init__(self):
        if self.n_runs < 1:
            raise InvalidArgumentError(f"n_runs must be >= 1, got {self.n_runs}")
        if not self.initial_variance > 0:
            raise InvalidArgumentError(f"initial variance must be > 0, got {self.initial_variance}")

    def filter_config(self, default_mean: float) -> FilterConfig:
        mean = default_mean if self.initial_mean is None else self.initial_mean
        return FilterConfig(mean, self.initial_variance)


def _read_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read file: {exc.strerror or exc}", str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}", str(path)
        ) from None


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ValidationError(f"expected an object, got {type(obj).__name__}", where)
    for key in obj:
        if key not in allowed:
            raise ValidationError(f"unknown field {key!r}", f"{where}.{key}" if where else key)


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"expected a number, got {value!r}", where)
    if not math.isfinite(value):
        raise ValidationError(f"expected a finite number, got {value!r}", where)
    return float(value)


def _vector(value, where):
    if not isinstance(value, list) or len(value) != 3:
        raise ValidationError(f"expected a list of 3 numbers, got {value!r}", where)
    return [_number(v, f"{where}[{i}]") for i, v in enumerate(value)]


def params_from_obj(obj, where="params") -> ModelParameters:
    """Validate an inline parameter object, or resolve a preset name."""
    if isinstance(obj, str):
        try:
            return get_preset(obj)
        except InvalidArgumentError as exc:
            raise ValidationError(str(exc), where) from None
    _reject_unknown(obj, _PARAM_KEYS, where)
    for key in ("a", "b", "c", "q", "r"):
        if key not in obj:
            raise ValidationError("missing required field", f"{where}.{key}")
    sem = None
    if obj.get("sem") is not None:
        _reject_unknown(obj["sem"], _SEM_KEYS, f"{where}.sem")
        s = obj["sem"]
        sem = ParameterSEM(
            a=_number(s.get("a", 0.0), f"{where}.sem.a"),
            b=_vector(s.get("b", [0.0, 0.0, 0.0]), f"{where}.sem.b"),
            c=_vector(s.get("c", [0.0, 0.0, 0.0]), f"{where}.sem.c"),
        )
    try:
        return ModelParameters(
            a=_number(obj["a"], f"{where}.a"),
            b=_vector(obj["b"], f"{where}.b"),
            c=_vector(obj["c"], f"{where}.c"),
            q=_number(obj["q"], f"{where}.q"),
            r=_vector(obj["r"], f"{where}.r"),
            sem=sem,
        )
    except ValidationError:
        raise
    except InvalidArgumentError as exc:
        raise ValidationError(str(exc), where) from None


def load_params(ref) -> ModelParameters:
    """Resolve ``ref`` as a preset name, else as a parameter JSON file."""
    ref = str(ref)
    try:
        return get_preset(ref)
    except InvalidArgumentError:
        pass
    if not Path(ref).exists():
        raise ValidationError("not a preset name and no such file", ref)
    return params_from_obj(_read_json(ref))


def write_params(params: Union[ModelParameters, FitResult], path) -> None:
    meta = None
    if isinstance(params, FitResult):
        fit = params
        params = fit.params
        meta = {
            "n_observations": fit.n_observations,
            "intercept_variance": fit.dynamics.intercept_variance,
            "per_participant_intercepts": fit.per_participant_intercepts,
        }
    obj = params.to_dict()
    if meta is not None:
        obj["meta"] = meta
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def _write_text(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot write file: {exc.strerror or exc}", str(path)) from None


def load_scenario(path) -> Scenario:
    obj = _read_json(path)
    _reject_unknown(obj, _SCENARIO_KEYS, "")
    if "trials" not in obj:
        raise ValidationError("missing required field", "trials")
    trials_obj = obj["trials"]
    if not isinstance(trials_obj, list) or not trials_obj:
        raise ValidationError("expected a nonempty list of trials", "trials")
    trials, ids = [], []
    for i, trial in enumerate(trials_obj):
        where = f"trials[{i}]"
        _reject_unknown(trial, _TRIAL_KEYS, where)
        events = trial.get("events")
        if not isinstance(events, list) or not events:
            raise ValidationError("expected a nonempty list of events", f"{where}.events")
        parsed = []
        for k, name in enumerate(events):
            try:
                parsed.append(Event.parse(name))
            except InvalidArgumentError as exc:
                raise ValidationError(str(exc), f"{where}.events[{k}]") from None
        trials.append(tuple(parsed))
        ids.append(str(trial.get("id", f"t{i}")))
    params_obj = obj.get("params", "table1")
    participants = obj.get("participants", 1)
    if isinstance(participants, bool) or not isinstance(participants, int) or participants < 1:
        raise ValidationError(f"expected a positive integer, got {participants!r}", "participants")
    spread = _number(obj.get("initial_spread", 0.0), "initial_spread")
    if spread < 0:
        raise ValidationError("must be >= 0", "initial_spread")
    return Scenario(
        trials=tuple(trials),
        initial_trust=_number(obj.get("initial_trust", 50.0), "initial_trust"),
        params=params_from_obj(params_obj),
        params_ref=params_obj if isinstance(params_obj, str) else "inline",
        trial_ids=tuple(ids),
        participants=participants,
        initial_spread=spread,
    )


def write_scenario(scenario: Scenario, path) -> None:
    obj = {
        "initial_trust": scenario.initial_trust,
        "params": scenario.params_ref if scenario.params_ref != "inline" else scenario.params.to_dict(),
        "participants": scenario.participants,
        "initial_spread": scenario.initial_spread,
        "trials": [
            {"id": tid, "events": [e.value for e in events]}
            for tid, events in zip(scenario.trial_ids, scenario.trials)
        ],
    }
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def _log_files(path):
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".csv" and p.is_file())
        if not files:
            raise ValidationError("directory contains no .csv trial logs", str(path))
        return files
    if not path.exists():
        raise ValidationError("no such file or directory", str(path))
    return [path]


def _cell_float(text, column, where, allow_empty):
    text = text.strip()
    if text == "":
        if allow_empty:
            return None
        raise ValidationError(f"empty {column}", where)
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"{column} is not a number: {text!r}", where) from None
    if not math.isfinite(value):
        raise ValidationError(f"{column} must be finite, got {text!r}", where)
    return value


def load_trial_logs(path) -> list:
    """Read trial logs from a CSV file or every ``*.csv`` in a directory.

    Errors cite the file and 1-based data row (the header is not counted).
    """
    grouped = {}
    for file in _log_files(path):
        with open(file, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ValidationError("empty file, expected a header row", str(file))
            header = [h.strip() for h in header]
            has_latent = tuple(header) == LOG_COLUMNS + (LATENT_COLUMN,)
            if tuple(header) != LOG_COLUMNS and not has_latent:
                raise ValidationError(
                    f"schema mismatch: expected header {','.join(LOG_COLUMNS)}, got {','.join(header)}",
                    f"{file}: row 0",
                )
            for row_no, row in enumerate(reader, start=1):
                if not row or all(not c.strip() for c in row):
                    continue
                where = f"{file}: row {row_no}"
                if len(row) != len(header):
                    raise ValidationError(
                        f"schema mismatch: expected {len(header)} cells, got {len(row)}", where
                    )
                cells = dict(zip(header, row))
                pid, tid = cells["participant_id"].strip(), cells["trial_id"].strip()
                if not pid or not tid:
                    raise ValidationError("empty participant_id or trial_id", where)
                try:
                    index = int(cells["event_index"])
                except ValueError:
                    raise ValidationError(
                        f"event_index is not an integer: {cells['event_index']!r}", where
                    ) from None
                try:
                    event = Event.parse(cells["event_type"])
                except InvalidArgumentError as exc:
                    raise ValidationError(str(exc), where) from None
                trust = _cell_float(cells["reported_trust"], "reported_trust", where, True)
                if trust is not None and not TRUST_MIN <= trust <= TRUST_MAX:
                    raise ValidationError(
                        f"reported_trust {trust:g} outside [{TRUST_MIN:g}, {TRUST_MAX:g}]", where
                    )
                obs = []
                for ch in CHANNELS:
                    v = _cell_float(cells[ch], ch, where, True)
                    obs.append(math.nan if v is None else v)
                latent = None
                if has_latent:
                    latent = _cell_float(cells[LATENT_COLUMN], LATENT_COLUMN, where, True)
                step = Step(event=event, reported_trust=trust, observation=tuple(obs), latent_trust=latent)
                grouped.setdefault((pid, tid), []).append((index, where, step))

    logs = []
    for (pid, tid), rows in grouped.items():
        rows.sort(key=lambda item: item[0])
        for expected, (index, where, _) in enumerate(rows):
            if index != expected:
                kind = "duplicated" if index < expected else "missing"
                raise ValidationError(
                    f"event_index not contiguous from 0 ({kind} index near {index}, expected {expected}) "
                    f"for participant {pid!r} trial {tid!r}",
                    where,
                )
        logs.append(TrialLog(pid, tid, tuple(step for _, _, step in rows)))
    return logs


def write_trial_logs(logs, path) -> None:
    logs = list(logs)
    with_latent = all(log.latent() is not None for log in logs)
    header = LOG_COLUMNS + ((LATENT_COLUMN,) if with_latent else ())
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for log in logs:
                for k, step in enumerate(log.steps):
                    row = [log.participant_id, log.trial_id, k, step.event.value, fmt(step.reported_trust)]
                    row += [fmt(v) for v in step.observation]
                    if with_latent:
                        row.append(fmt(step.latent_trust))
                    writer.writerow(row)
    except OSError as exc:
        raise ValidationError(f"cannot write file: {exc.strerror or exc}", str(path)) from None


@dataclass(frozen=True)
class EstimateTrace:
    """Filter output for one trial log, ready for export."""

    log: TrialLog
    states: tuple = field(default_factory=tuple)


def _result_rows(result):
    if isinstance(result, EnsembleResult):
        for k in range(result.n_steps):
            yield [
                k, result.events[k].value, result.best_truth[k], None,
                result.best_estimate[k], result.best_variance[k],
                result.band_lower[k], result.band_upper[k],
            ]
    elif isinstance(result, EstimateTrace):
        latent = result.log.latent()
        for k, (step, state) in enumerate(zip(result.log.steps, result.states)):
            yield [
                k, step.event.value, None if latent is None else latent[k], step.reported_trust,
                state.mean, state.variance, None, None,
            ]
    else:
        raise InvalidArgumentError(f"cannot write results of type {type(result).__name__}")


def write_results(result, path) -> None:
    """Write estimates as CSV.

    ``result`` is an :class:`EnsembleResult`, an :class:`EstimateTrace`, a
    :class:`FitResult` (written as a parameter file), or a dict mapping
    trial ids to ensemble results or traces (adds leading id columns).
    """
    if isinstance(result, (FitResult, ModelParameters)):
        write_params(result, path)
        return
    if isinstance(result, dict):
        header = ("trial_id",) + RESULT_COLUMNS
        rows = [[key] + row for key, res in result.items() for row in _result_rows(res)]
    else:
        header = RESULT_COLUMNS
        rows = list(_result_rows(result))
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([c if isinstance(c, str) else (c if isinstance(c, int) else fmt(c)) for c in row])
    except OSError as exc:
        raise ValidationError(f"cannot write file: {exc.strerror or exc}", str(path)) from None


def read_results(path) -> dict:
    """Read a results CSV into column arrays; empty numeric cells become NaN."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        header = reader.fieldnames or []
    out = {}
    for col in header:
        values = [row[col] for row in rows]
        if col in ("trial_id", "event_type"):
            out[col] = values
        elif col == "step":
            out[col] = np.array([int(v) for v in values])
        else:
            out[col] = np.array([float(v) if v != "" else math.nan for v in values])
    return out
