import json

import pytest

from hvexp.scenario import (ScenarioError, apply_overrides, load_scenario, load_shipped,
                            parse_scenario, shipped_scenario_paths)


def raw_of(name):
    path = [p for p in shipped_scenario_paths() if p.endswith(f"/{name}.json")][0]
    return json.loads(open(path).read())


def test_every_shipped_file_parses():
    paths = shipped_scenario_paths() + shipped_scenario_paths("oracle")
    assert len(paths) == 9
    for p in paths:
        sf = load_scenario(p)
        assert sf.dim == 1


def test_unknown_top_level_key_rejected():
    raw = raw_of("t33_desk")
    raw["colour"] = "red"
    with pytest.raises(ScenarioError, match="unknown key 'colour'"):
        parse_scenario(raw)


def test_unknown_nested_key_rejected():
    raw = raw_of("t33_desk")
    raw["grids"]["x"]["nodes"] = 4
    with pytest.raises(ScenarioError, match=r"grids\.x: unknown key 'nodes'"):
        parse_scenario(raw)


def test_unknown_catalog_kind_named():
    raw = raw_of("t33_desk")
    raw["inputs"][0] = {"kind": "sinc"}
    with pytest.raises(ScenarioError, match="unknown kind 'sinc'"):
        parse_scenario(raw)


def test_arity_mismatch_rejected():
    raw = raw_of("t33_desk")
    raw["arity"] = 2
    with pytest.raises(ScenarioError, match="arity"):
        parse_scenario(raw)


def test_bad_schema_version():
    raw = raw_of("t33_desk")
    raw["schema_version"] = 99
    with pytest.raises(ScenarioError, match="unsupported version"):
        parse_scenario(raw)


def test_unknown_theorem():
    raw = raw_of("t33_desk")
    raw["theorem"]["id"] = "T9.9"
    with pytest.raises(ScenarioError, match="unknown result"):
        parse_scenario(raw)


def test_json_error_reports_line_and_column(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "dimension": 1,\n  oops\n}\n')
    with pytest.raises(ScenarioError, match=r"bad\.json:3:3:"):
        load_scenario(bad)


def test_overrides_nested_and_indexed():
    raw = raw_of("t33_desk")
    out = apply_overrides(raw, ["weights.0.gamma=-0.25", "seed=5", "grids.x.k_max=10"])
    assert out["weights"][0]["gamma"] == -0.25 and out["seed"] == 5
    assert out["grids"]["x"]["k_max"] == 10
    assert raw["seed"] == 0  # the input is untouched
    sc = parse_scenario(out).scenario
    assert sc.gamma[0] == -0.25 and sc.seed == 5


def test_override_requires_equals():
    with pytest.raises(ScenarioError, match="KEY=VALUE"):
        apply_overrides({}, ["seed"])


def test_load_shipped_searches_subdirectories():
    sf = load_shipped("t33_constant_oracle")
    assert sf.scenario.theorem_id == "T3.3"
    with pytest.raises(FileNotFoundError):
        load_shipped("nope")


def test_norm_only_file():
    sf = load_shipped("norm_zero")
    assert sf.scenario is None and sf.norm_space is not None
