import json
from pathlib import Path

import pytest

from core.entities.action import KernelVariant
from core.entities.ensemble import IntegrationMethod
from core.entities.errors import ConfigError
from core.entities.scenario import BoundaryPolicy, InitialStateKind
from infrastructure.config.scenario_loader import (config_hash, emit_ensemble, emit_scenario,
                                                   load_ensemble, load_scenario, parse_ensemble,
                                                   parse_scenario)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

MINIMAL = {
    "grid": {"n_t": 6, "n_x": 8, "dt": 0.1, "dx": 0.5},
    "initial_state": {"kind": "modes", "amplitudes": [[16, 1.0]]},
    "epsilon": 0.0
}


def _text(**changes):
    payload = dict(MINIMAL, **changes)
    return json.dumps(payload, indent=2)


@pytest.mark.parametrize("name", ["two_mode.json", "gaussian_packet.json"])
def test_bundled_scenarios_load(name):
    scenario = load_scenario(SCENARIOS / name)
    assert scenario.name == Path(name).stem


def test_defaults_fill_optional_fields():
    scenario = parse_scenario(_text(), "unit.json")
    assert scenario.name == "unit"
    assert scenario.mass.m == 1.0
    assert scenario.kernel.variant is KernelVariant.COVARIANT
    assert scenario.boundary is BoundaryPolicy.FIX_INITIAL
    assert scenario.initial_state.kind is InitialStateKind.MODES
    assert scenario.top_k is None


def test_missing_epsilon_names_the_field():
    payload = dict(MINIMAL)
    del payload["epsilon"]
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario(json.dumps(payload))
    assert excinfo.value.field == "epsilon"


def test_unknown_key_is_located():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario(_text(epsilom=0.1))
    assert excinfo.value.field == "epsilom"
    assert excinfo.value.line is not None


def test_unknown_nested_key_is_rejected():
    with pytest.raises(ConfigError, match="unknown key 'nx'"):
        parse_scenario(_text(grid={"n_t": 6, "nx": 8, "dt": 0.1, "dx": 0.5}))


def test_malformed_json_reports_position():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario('{\n  "epsilon": 0.1,\n  "grid": \n}')
    assert excinfo.value.line == 4


@pytest.mark.parametrize("changes", [
    {"epsilon": "large"},
    {"epsilon": True},
    {"kernel": "gaussian"},
    {"grid": {"n_t": 6.5, "n_x": 8, "dt": 0.1, "dx": 0.5}},
    {"initial_state": {"kind": "modes", "amplitudes": [[16]]}},
    {"initial_state": {"kind": "gaussian", "spinor": [1.0, 0.0]}},
])
def test_invalid_values_are_config_errors(changes):
    with pytest.raises(ConfigError):
        parse_scenario(_text(**changes))


def test_complex_amplitudes_use_pairs():
    scenario = parse_scenario(_text(initial_state={"kind": "modes",
                                                   "amplitudes": [[16, [0.6, 0.8]], [17, 0.5]]}))
    assert scenario.initial_state.amplitudes == ((16, 0.6 + 0.8j), (17, 0.5 + 0j))


@pytest.mark.parametrize("name", ["two_mode.json", "gaussian_packet.json"])
def test_emission_parses_back_to_the_same_scenario(name):
    scenario = load_scenario(SCENARIOS / name)
    text = emit_scenario(scenario)
    assert parse_scenario(text, name) == scenario
    assert emit_scenario(parse_scenario(text, name)) == text


def test_hash_ignores_formatting():
    compact = parse_scenario(json.dumps(MINIMAL), "unit.json")
    spaced = parse_scenario(_text(), "unit.json")
    assert config_hash(emit_scenario(compact)) == config_hash(emit_scenario(spaced))
    changed = parse_scenario(_text(epsilon=0.2), "unit.json")
    assert config_hash(emit_scenario(changed)) != config_hash(emit_scenario(spaced))


def test_bundled_ensemble_loads():
    system, config = load_ensemble(SCENARIOS / "born_two_outcome.json")
    assert config.n_samples == 10_000
    assert config.method is IntegrationMethod.STATIONARY
    assert set(system.outcome_groups) == {"upper", "lower"}
    assert sum(system.group_weights().values()) == pytest.approx(1.0)


def test_ensemble_emission_parses_back():
    system, config = load_ensemble(SCENARIOS / "born_two_outcome.json")
    text = emit_ensemble(system, config)
    assert emit_ensemble(*parse_ensemble(text)) == text


def test_ensemble_rejects_empty_sample_count():
    document = json.loads((SCENARIOS / "born_two_outcome.json").read_text())
    document["n_samples"] = 0
    with pytest.raises(ConfigError):
        parse_ensemble(json.dumps(document))


def test_missing_files_are_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "absent.json")
    with pytest.raises(ConfigError):
        load_ensemble(tmp_path / "absent.json")
