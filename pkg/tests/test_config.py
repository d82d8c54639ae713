import json

import pytest

from slowlight.config import (SCHEMA, ConfigInvalid, check, load_json, parse_config,
                              scenario_names, scenario_path, validate_config)
from slowlight.errors import ConfigError

SHIPPED = ["fig1a", "fig1b", "fig1c", "fig3a", "fig3b", "tb-sweep"]


def shipped_doc(name):
    return load_json(scenario_path(name))


def test_six_scenarios_are_shipped():
    assert scenario_names() == sorted(SHIPPED)


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_configs_validate_cleanly(name):
    rep = validate_config(scenario_path(name))
    assert rep.valid and rep.warnings == []
    assert shipped_doc(name)["comment"]


@pytest.mark.parametrize("name", SHIPPED)
def test_round_trip(name):
    cfg = parse_config(shipped_doc(name))
    again = parse_config(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()
    assert again.config_hash() == cfg.config_hash()


def test_negative_width_is_named():
    doc = shipped_doc("fig1b")
    doc["profile"]["holes"][0]["width"] = -18e6
    rep, cfg = check(doc)
    assert cfg is None
    assert {"field": "profile.holes[0].width", "message": "hole.width must be positive"} in rep.errors


def test_every_violation_is_listed():
    doc = shipped_doc("fig3a")
    doc["profile"]["holes"][0]["width"] = -1.0
    doc["cavity"]["r2"] = 1.5
    doc["pulse"]["samples"] = 64
    rep, _ = check(doc)
    fields = {e["field"] for e in rep.errors}
    assert {"profile.holes[0].width", "cavity.r2", "pulse.samples"} <= fields


def test_schema_violations_name_the_path():
    doc = shipped_doc("fig1a")
    doc["grid"]["span"] = "wide"
    doc["bogus"] = 1
    rep, _ = check(doc)
    fields = [e["field"] for e in rep.errors]
    assert "grid.span" in fields and "<root>" in fields


def test_coarse_resolution_warns_but_validates():
    doc = shipped_doc("fig1c")
    doc["grid"]["resolution"] = 2000.0
    rep, cfg = check(doc)
    assert rep.valid and cfg is not None
    assert rep.warnings and rep.warnings[0]["field"] == "grid.resolution"


def test_residual_above_background_is_rejected():
    doc = shipped_doc("fig1c")
    doc["profile"]["holes"][0]["residual"] = 5000.0
    rep, _ = check(doc)
    assert any("residual" in e["message"] for e in rep.errors)


def test_parse_raises_with_report():
    doc = shipped_doc("fig1c")
    doc["cavity"]["length"] = -1.0
    with pytest.raises(ConfigInvalid) as exc:
        parse_config(doc)
    assert exc.value.field == "cavity.length"
    assert exc.value.report.errors


def test_unreadable_and_unparsable(tmp_path):
    with pytest.raises(ConfigError):
        validate_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        validate_config(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[]")
    with pytest.raises(ConfigError):
        validate_config(arr)


def test_unknown_scenario():
    with pytest.raises(ConfigError, match="unknown scenario"):
        scenario_path("fig9z")


def test_grid_count_is_power_of_two_at_least_resolution():
    cfg = parse_config(shipped_doc("fig1c"))
    n = cfg.grid.count
    assert n & (n - 1) == 0
    assert cfg.grid.span / n <= cfg.grid.resolution


def test_null_excess_loss_means_calibrated():
    cfg = parse_config(shipped_doc("fig1a"))
    assert cfg.calibrated_excess
    assert cfg.to_dict()["cavity"]["excess_roundtrip"] is None
    doc = shipped_doc("fig1a")
    doc["cavity"]["excess_roundtrip"] = 0.9
    assert parse_config(doc).cavity.excess_roundtrip == 0.9


def test_schema_states_units():
    hole = SCHEMA["properties"]["profile"]["properties"]["holes"]["items"]["properties"]
    assert "Hz" in hole["width"]["description"]
    assert "1/m" in hole["residual"]["description"]
