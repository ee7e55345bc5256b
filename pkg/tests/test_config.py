import json

import pytest

from pregwa.config import (
    REFERENCE_SCENARIO,
    ConfigError,
    experiment_from_dict,
    load_experiment,
    load_sweep,
    reference_config,
    scenario_from_dict,
    sweep_from_dict,
)
from pregwa.scenario import export_traces, generate_traces, RoadLayout


def test_reference_config_overrides_do_not_leak():
    doc = reference_config(streaming_rate=4e5, n_users=7, seed=3)
    assert doc["video"]["streaming_rate_bps"] == 4e5 and doc["mobility"]["n_users"] == 7 and doc["seed"] == 3
    assert REFERENCE_SCENARIO["mobility"]["n_users"] == 40


def test_reference_scenario_shape():
    sc = scenario_from_dict(reference_config())
    assert sc.n_users == 40 and sc.horizon == 200 and sc.slot_duration == 1.0
    assert sc.layout.bs_positions == ((500.0, 0.0), (1500.0, 0.0)) and sc.layout.length == 2000.0
    assert sc.radio.bandwidth_hz == 5e6 and sc.radio.snr_cap_db == 20.0
    assert sc.radio.tx_power_dbm == pytest.approx(46.02)


@pytest.mark.parametrize("mutate,expect", [
    (lambda d: d.pop("horizon"), "<root>: 'horizon' is a required property"),
    (lambda d: d.update(colour="red"), "'colour' was unexpected"),
    (lambda d: d["mobility"].update(n_users=0), "mobility/n_users: 0 is less than"),
    (lambda d: d["strategy"].update(name="fastest"), "strategy/name: 'fastest' is not one of"),
    (lambda d: d.pop("video"), "<root>: give 'video' or 'sessions'"),
    (lambda d: d.update(traces_file="t.csv"), "<root>: give exactly one of 'mobility' and 'traces_file'"),
])
def test_schema_violations(mutate, expect):
    doc = reference_config()
    mutate(doc)
    with pytest.raises(ConfigError) as exc:
        experiment_from_dict(doc)
    assert expect in str(exc.value)


def test_semantic_errors_become_config_errors():
    doc = reference_config()
    doc["mobility"]["speed_range"] = [10.0, 40.0]
    with pytest.raises(ConfigError):
        scenario_from_dict(doc)
    doc = reference_config()
    doc["strategy"]["bs_off"] = [5]
    with pytest.raises(ConfigError, match="no base station 5"):
        experiment_from_dict(doc)


def test_explicit_sessions_and_trace_file(tmp_path):
    layout = RoadLayout()
    traces = generate_traces(layout, 3, (10.0, 20.0), 10, 50, seed=2)
    export_traces(traces, tmp_path / "tr.csv")
    doc = {
        "horizon": 50,
        "traces_file": "tr.csv",
        "sessions": [{"user_id": u, "streaming_rate_bps": 1e5, "total_size_bits": 1e6, "start_slot": 2}
                     for u in range(3)],
        "strategy": {"name": "heuristic"},
    }
    (tmp_path / "s.json").write_text(json.dumps(doc))
    exp = load_experiment(tmp_path / "s.json")
    assert exp.strategy == "heuristic"
    assert list(exp.scenario.traces) == traces
    assert all(s.start_slot == 2 for s in exp.scenario.sessions)


def test_missing_trace_file(tmp_path):
    doc = {"horizon": 10, "traces_file": "absent.csv", "video": {"streaming_rate_bps": 1e5, "duration_slots": 2}}
    with pytest.raises(ConfigError, match="traces"):
        scenario_from_dict(doc, tmp_path)


def test_bad_json(tmp_path):
    p = tmp_path / "s.json"
    p.write_text("{\n  \"horizon\": 5,\n}")
    with pytest.raises(ConfigError, match="line 3"):
        load_experiment(p)


def test_sweep_documents(tmp_path):
    (tmp_path / "base.json").write_text(json.dumps(reference_config(n_users=3)))
    spec_doc = {"sweep_id": "s", "base": "base.json", "parameter": "n_users", "values": [2, 4],
                "strategies": ["equal_share"]}
    (tmp_path / "sw.json").write_text(json.dumps(spec_doc))
    spec = load_sweep(tmp_path / "sw.json")
    d = spec.document_for(4)
    assert d["mobility"]["n_users"] == 4 and d["scenario_id"] == "s:n_users=4"
    with pytest.raises(ConfigError):
        spec.document_for(2.5)
    rate = sweep_from_dict({**spec_doc, "base": reference_config(), "parameter": "streaming_rate", "values": [4e5]})
    assert rate.document_for(4e5)["video"]["streaming_rate_bps"] == 4e5


@pytest.mark.parametrize("bad", [
    {"values": []},
    {"strategies": []},
    {"parameter": "speed"},
    {"values": [-1]},
])
def test_sweep_schema(bad):
    doc = {"base": reference_config(), "parameter": "n_users", "values": [2], "strategies": ["optimal"], **bad}
    with pytest.raises(ConfigError):
        sweep_from_dict(doc)


def test_shipped_configs_load():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    for p in sorted(root.glob("*.json")):
        doc = json.loads(p.read_text())
        if "parameter" in doc:
            spec = load_sweep(p)
            assert spec.values and spec.strategies
        else:
            load_experiment(p)
