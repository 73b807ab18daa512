import json

import pytest

from qpurify.config_loader import (
    CONFIG_FILENAME,
    DEFAULT_CONFIG,
    apply_flags,
    config_to_dict,
    load_config,
    to_scenario,
)
from qpurify.config_template import DEFAULT_QPURIFY_TOML
from qpurify.errors import ConfigError


def test_defaults_without_files(tmp_path):
    cfg = load_config(cwd=str(tmp_path))
    assert cfg == DEFAULT_CONFIG
    assert (cfg.n, cfg.c1, cfg.trials, cfg.seed, cfg.grid_size) == (6, 0.75, 40000, 20020101, 1024)
    assert (cfg.compare, cfg.c1_min, cfg.c1_max, cfg.c1_steps) == ("purify", 0.5, 1.0, 11)


def test_template_parses_to_the_defaults(tmp_path):
    (tmp_path / CONFIG_FILENAME).write_text(DEFAULT_QPURIFY_TOML, encoding="utf-8")
    assert load_config(cwd=str(tmp_path)) == DEFAULT_CONFIG


def test_layering_order(tmp_path):
    (tmp_path / CONFIG_FILENAME).write_text("[qpurify]\nn = 4\nc1 = 0.8\ntrials = 10\n", encoding="utf-8")
    explicit = tmp_path / "run.json"
    explicit.write_text(json.dumps({"c1": 0.9, "grid-size": 64}), encoding="utf-8")

    cfg = load_config(str(explicit), cwd=str(tmp_path))
    assert (cfg.n, cfg.c1, cfg.trials, cfg.grid_size) == (4, 0.9, 10, 64)

    cfg = apply_flags(cfg, {"trials": 3, "c1": None, "purify": False})
    assert (cfg.c1, cfg.trials, cfg.purify) == (0.9, 3, False)


def test_unknown_keys_are_ignored(tmp_path):
    path = tmp_path / "extra.toml"
    path.write_text('[qpurify]\ncolour = "blue"\nstrategy = "RANDOM"\n', encoding="utf-8")
    assert load_config(str(path), cwd=str(tmp_path)).strategy == "random"


def test_string_booleans(tmp_path):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"purify": "no"}), encoding="utf-8")
    assert load_config(str(path), cwd=str(tmp_path)).purify is False

    path.write_text(json.dumps({"purify": "maybe"}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(path), cwd=str(tmp_path))


def test_bad_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.toml"), cwd=str(tmp_path))

    broken = tmp_path / "broken.toml"
    broken.write_text("[qpurify\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(broken), cwd=str(tmp_path))

    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"n": "six"}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(wrong), cwd=str(tmp_path))


def test_to_scenario_validates():
    scenario = to_scenario(apply_flags(DEFAULT_CONFIG, {"n": 4, "trials": 5}))
    assert (scenario.n_qubits, scenario.trials, scenario.master_seed) == (4, 5, 20020101)

    with pytest.raises(ConfigError):
        to_scenario(apply_flags(DEFAULT_CONFIG, {"n": 5}))


def test_config_to_dict_round_trips_through_flags():
    d = config_to_dict(DEFAULT_CONFIG)
    assert d["seed"] == 20020101
    assert apply_flags(DEFAULT_CONFIG, d) == DEFAULT_CONFIG


def test_integer_fields_reject_fractional_values(tmp_path):
    path = tmp_path / "counts.json"
    path.write_text(json.dumps({"n": 4.0, "trials": 1000.0}), encoding="utf-8")
    cfg = load_config(str(path), cwd=str(tmp_path))
    assert (cfg.n, cfg.trials) == (4, 1000)
    assert isinstance(cfg.n, int)

    for bad in ({"n": 6.5}, {"trials": 1000.9}, {"seed": True}, {"workers": 2.5}):
        path.write_text(json.dumps(bad), encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(str(path), cwd=str(tmp_path))
