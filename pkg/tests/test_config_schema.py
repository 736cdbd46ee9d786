"""The published config schema and the loader must agree."""

import json
from pathlib import Path

import pytest
from jsonschema import Draft7Validator

from molforge.conductor import ConfigError, parse_config

SCHEMA_PATH = Path(__file__).resolve().parent.parent / "docs" / "config.schema.json"
SCHEMA = json.loads(SCHEMA_PATH.read_text())
VALIDATOR = Draft7Validator(SCHEMA)


def minimal_config(**over):
    cfg = {
        "seed": 1,
        "archive_path": "/tmp/run.ndjson",
        "rules": {"min_atoms": 2, "max_atoms": 10, "max_weight": 200.0},
        "evolution": {
            "population_size": 8,
            "iterations": 2,
            "mutation_rate_pct": 40.0,
            "crossover_rate_pct": 80.0,
        },
        "fitness": {"target": "[CH3]-[OH]"},
    }
    cfg.update(over)
    return cfg


def full_config():
    return minimal_config(
        elements=["C", "N", "O", "S"],
        element_overrides={"S": {"valence": 6}, "O": {"enabled": True}},
        fragments=["[C]=[O]", "[OH]"],
        leads=["[CH3]-[OH]"],
        generation={
            "atom_vs_fragment_pct": 40.0,
            "growth_stop_pct": 25.0,
            "max_attempts": 150,
        },
        evolution={
            "population_size": 20,
            "iterations": 5,
            "mutation_rate_pct": 40.0,
            "crossover_rate_pct": 80.0,
            "selection_method": "tournament",
            "tournament_size": 4,
            "sample_size": 6,
            "elitism": 2,
            "max_op_attempts": 12,
        },
        fitness={"target": "[CH3]-[C](=[O])-[OH]", "violation_penalty": 0.4},
        interaction={
            "interval_generations": 2,
            "strategy": {"kind": "top-n", "param": 5},
            "score_scale": {"bad": 0.0, "ok": 0.5, "good": 1.0},
            "timeout_s": 30.0,
        },
        api={"host": "127.0.0.1", "port": 9000},
    )


def schema_errors(obj):
    return [e.message for e in VALIDATOR.iter_errors(obj)]


def test_schema_is_itself_valid():
    Draft7Validator.check_schema(SCHEMA)


def test_minimal_config_passes_both():
    cfg = minimal_config()
    assert schema_errors(cfg) == []
    parse_config(cfg)


def test_full_config_passes_both():
    cfg = full_config()
    assert schema_errors(cfg) == []
    parse_config(cfg)


def test_all_strategy_accepts_null_param():
    cfg = minimal_config(
        interaction={"interval_generations": 1, "strategy": {"kind": "all", "param": None}}
    )
    assert schema_errors(cfg) == []
    parse_config(cfg)


BAD_CONFIGS = [
    ("missing seed", lambda: {k: v for k, v in minimal_config().items() if k != "seed"}),
    ("negative seed", lambda: minimal_config(seed=-1)),
    ("string seed", lambda: minimal_config(seed="7")),
    ("unknown top-level key", lambda: minimal_config(turbo=True)),
    ("rules missing max_weight", lambda: minimal_config(
        rules={"min_atoms": 1, "max_atoms": 10})),
    ("min_atoms zero", lambda: minimal_config(
        rules={"min_atoms": 0, "max_atoms": 10, "max_weight": 100.0})),
    ("fragments not a list", lambda: minimal_config(fragments="[OH]")),
    ("mutation rate above 100", lambda: minimal_config(evolution={
        "population_size": 8, "iterations": 2,
        "mutation_rate_pct": 101.0, "crossover_rate_pct": 80.0})),
    ("population of one", lambda: minimal_config(evolution={
        "population_size": 1, "iterations": 2,
        "mutation_rate_pct": 40.0, "crossover_rate_pct": 80.0})),
    ("unknown selection method", lambda: minimal_config(evolution={
        "population_size": 8, "iterations": 2, "mutation_rate_pct": 40.0,
        "crossover_rate_pct": 80.0, "selection_method": "rank"})),
    ("unknown evolution key", lambda: minimal_config(evolution={
        "population_size": 8, "iterations": 2, "mutation_rate_pct": 40.0,
        "crossover_rate_pct": 80.0, "speed": 9})),
    ("penalty above one", lambda: minimal_config(
        fitness={"target": "[CH4]", "violation_penalty": 1.5})),
    ("interval zero", lambda: minimal_config(interaction={
        "interval_generations": 0, "strategy": {"kind": "all"}})),
    ("all-strategy with a param", lambda: minimal_config(interaction={
        "interval_generations": 1, "strategy": {"kind": "all", "param": 3}})),
    ("top-n without a param", lambda: minimal_config(interaction={
        "interval_generations": 1, "strategy": {"kind": "top-n"}})),
    ("port zero", lambda: minimal_config(api={"port": 0})),
]


@pytest.mark.parametrize("label,build", BAD_CONFIGS, ids=[b[0] for b in BAD_CONFIGS])
def test_bad_configs_rejected_by_both(label, build):
    cfg = build()
    assert schema_errors(cfg), f"schema accepted: {label}"
    with pytest.raises(ConfigError):
        parse_config(cfg)


def test_schema_defaults_match_the_loader():
    """Defaults documented in the schema are the ones the loader applies."""
    canonical = parse_config(minimal_config()).canonical
    evo_props = SCHEMA["properties"]["evolution"]["properties"]
    for key in ("selection_method", "tournament_size", "sample_size",
                "elitism", "max_op_attempts"):
        assert canonical["evolution"][key] == evo_props[key]["default"]
    gen_props = SCHEMA["properties"]["generation"]["properties"]
    for key in ("atom_vs_fragment_pct", "growth_stop_pct", "max_attempts"):
        assert canonical["generation"][key] == gen_props[key]["default"]
    fit_props = SCHEMA["properties"]["fitness"]["properties"]
    assert canonical["fitness"]["violation_penalty"] == (
        fit_props["violation_penalty"]["default"]
    )
