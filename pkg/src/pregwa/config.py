"""JSON experiment documents: scenario configs and sweep specs."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .radio import RadioConfig
from .scenario import (
    RoadLayout,
    ScenarioConfig,
    ScenarioError,
    VideoSession,
    generate_traces,
    load_traces,
    make_sessions,
)
from .sim import PowerModel, RunOptions


class ConfigError(ValueError):
    pass


def _schema(name):
    return json.loads(resources.files("pregwa").joinpath("schemas", name).read_text())


# Road, radio and traffic of the two-cell reference case. The interference
# margin, video length and arrival spread were fixed once so that the rate
# profile rises and falls around each BS and every video finishes inside
# the window.
REFERENCE_SCENARIO = {
    "scenario_id": "two-cell",
    "horizon": 200,
    "slot_duration": 1.0,
    "seed": 1,
    "layout": {"length": 2000.0, "bs_positions": [[500.0, 0.0], [1500.0, 0.0]], "one_way": True},
    "radio": {"tx_power_dbm": 46.02, "bandwidth_hz": 5e6, "snr_cap_db": 20.0, "interference_margin_db": 25.0},
    "mobility": {"n_users": 40, "speed_range": [10.0, 20.0], "arrival_spread": 140},
    "video": {"streaming_rate_bps": 1.2e6, "duration_slots": 60},
    "strategy": {"name": "optimal", "mode": "hard"},
}


def reference_config(**overrides) -> dict:
    """Copy of :data:`REFERENCE_SCENARIO` with ``streaming_rate`` / ``n_users`` / ``seed`` overrides."""
    doc = copy.deepcopy(REFERENCE_SCENARIO)
    if "streaming_rate" in overrides:
        doc["video"]["streaming_rate_bps"] = float(overrides.pop("streaming_rate"))
    if "n_users" in overrides:
        doc["mobility"]["n_users"] = int(overrides.pop("n_users"))
    doc.update(overrides)
    return doc


@dataclass(frozen=True)
class Experiment:
    scenario_id: str
    scenario: ScenarioConfig
    strategy: str
    options: RunOptions
    document: dict


# root-level alternatives; jsonschema's own message would echo the whole document
_ALTERNATIVES = {
    "oneOf": "give exactly one of 'mobility' and 'traces_file'",
    "anyOf": "give 'video' or 'sessions'",
}


def validate_document(doc: dict, schema: str = "scenario.schema.json") -> None:
    try:
        jsonschema.validate(doc, _schema(schema))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        msg = _ALTERNATIVES.get(exc.validator, exc.message) if not exc.absolute_path else exc.message
        raise ConfigError(f"{where}: {msg}") from None


def scenario_from_dict(doc: dict, base_dir: Path | None = None) -> ScenarioConfig:
    validate_document(doc)
    T = doc["horizon"]
    tau = doc.get("slot_duration", 1.0)
    seed = doc.get("seed", 0)
    try:
        layout = RoadLayout(**doc.get("layout", {}))
        radio = RadioConfig(**doc.get("radio", {}))
        if "traces_file" in doc:
            path = Path(doc["traces_file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            traces = load_traces(path, layout, tau)
        else:
            mob = doc["mobility"]
            traces = generate_traces(layout, mob["n_users"], tuple(mob.get("speed_range", (10.0, 20.0))),
                                     mob.get("arrival_spread", 0), T, seed, tau)
        if "sessions" in doc:
            sessions = [VideoSession(s["user_id"], s["streaming_rate_bps"], s["total_size_bits"],
                                     s.get("start_slot", 0)) for s in doc["sessions"]]
        else:
            v = doc["video"]
            sessions = make_sessions(traces, v["streaming_rate_bps"], v["duration_slots"], tau)
        return ScenarioConfig(layout, traces, sessions, T, tau, radio, seed, meta={"id": doc.get("scenario_id", "")})
    except (ScenarioError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    except OSError as exc:
        raise ConfigError(f"cannot read traces: {exc}") from None


def experiment_from_dict(doc: dict, base_dir: Path | None = None) -> Experiment:
    scenario = scenario_from_dict(doc, base_dir)
    strat = doc.get("strategy", {})
    power = doc.get("power_model")
    options = RunOptions(
        mode=strat.get("mode", "hard"),
        soft_lambda=strat.get("soft_lambda", RunOptions.soft_lambda),
        off_bs=tuple(strat.get("bs_off", ())),
        power_model=PowerModel(**power) if power is not None else PowerModel(),
    )
    for j in options.off_bs:
        if j >= scenario.layout.n_bs:
            raise ConfigError(f"strategy/bs_off: no base station {j}")
    return Experiment(doc.get("scenario_id", "scenario"), scenario, strat.get("name", "optimal"), options, doc)


def read_json(path) -> dict:
    path = Path(path)
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None


def load_experiment(path) -> Experiment:
    path = Path(path)
    return experiment_from_dict(read_json(path), path.parent)


@dataclass(frozen=True)
class SweepSpec:
    sweep_id: str
    base: dict
    base_dir: Path | None
    parameter: str
    values: tuple[float, ...]
    strategies: tuple[str, ...]
    results: str = "results.csv"
    chart: str = "chart.svg"
    title: str = ""

    def document_for(self, value) -> dict:
        doc = copy.deepcopy(self.base)
        if self.parameter == "streaming_rate":
            doc.setdefault("video", {"duration_slots": 60})["streaming_rate_bps"] = float(value)
            for s in doc.get("sessions", []):
                s["total_size_bits"] = s["total_size_bits"] / s["streaming_rate_bps"] * float(value)
                s["streaming_rate_bps"] = float(value)
        else:
            if int(value) != value:
                raise ConfigError("n_users values must be integers")
            if "mobility" not in doc:
                raise ConfigError("an n_users sweep needs a synthetic-mobility base scenario")
            doc["mobility"]["n_users"] = int(value)
        doc["scenario_id"] = f"{self.sweep_id}:{self.parameter}={value:g}"
        return doc


def sweep_from_dict(doc: dict, base_dir: Path | None = None) -> SweepSpec:
    validate_document(doc, "sweep.schema.json")
    base = doc["base"]
    base_path_dir = base_dir
    if isinstance(base, str):
        p = Path(base)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        base = read_json(p)
        base_path_dir = p.parent
    validate_document(base)
    return SweepSpec(
        doc.get("sweep_id", "sweep"),
        base,
        base_path_dir,
        doc["parameter"],
        tuple(doc["values"]),
        tuple(doc["strategies"]),
        doc.get("results", "results.csv"),
        doc.get("chart", "chart.svg"),
        doc.get("title", ""),
    )


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    return sweep_from_dict(read_json(path), path.parent)
