"""key = value config files, --set overrides and validation."""

import pytest

from src.config import dump_config, load_config, parse_assignments
from src.errors import ConfigurationError

from conftest import CONFIGS, MAPS, ROOT

SMOKE_MAP = f"env.map_path={MAPS / 'smoke_5x5.txt'}"


@pytest.fixture
def in_repo(monkeypatch):
    monkeypatch.chdir(ROOT)


@pytest.mark.parametrize("name", ["smoke.cfg", "desk.cfg", "full.cfg"])
def test_bundled_configs_validate(in_repo, name):
    config = load_config(CONFIGS / name)
    assert config.model.max_option_length == config.search.max_option_length == config.training.max_option_length
    assert config.model.observation_shape[0] == 3


def test_smoke_config_values(in_repo):
    config = load_config(CONFIGS / "smoke.cfg")
    assert config.option_length_value == 3
    assert config.model.observation_shape == (3, 5, 5)
    assert config.search.simulations == 12
    assert config.run_dir.name == "smoke"


def test_overrides_win_over_the_file(in_repo):
    config = load_config(CONFIGS / "smoke.cfg", ["search.simulations=7", "seed=11", "option_length=2"])
    assert config.search.simulations == 7
    assert config.seed == 11
    assert config.training.max_option_length == 2


def test_every_problem_is_reported_at_once():
    with pytest.raises(ConfigurationError) as info:
        parse_assignments(["bogus = 1", "nosection.x = 2", "no equals sign"], "test.cfg")
    problems = info.value.problems
    assert len(problems) == 3
    assert "test.cfg:1" in problems[0]
    assert info.value.exit_code == 2


def test_unknown_section_field_is_rejected():
    with pytest.raises(ConfigurationError) as info:
        load_config(None, [SMOKE_MAP, "search.simulationz=3"])
    assert any("simulationz" in p for p in info.value.problems)


def test_option_lengths_must_agree():
    with pytest.raises(ConfigurationError) as info:
        load_config(None, [SMOKE_MAP, "model.max_option_length=4"])
    assert any("max_option_length" in p for p in info.value.problems)


def test_out_of_range_values_are_rejected():
    with pytest.raises(ConfigurationError):
        load_config(None, [SMOKE_MAP, "replay.alpha=-1"])
    with pytest.raises(ConfigurationError):
        load_config(None, [SMOKE_MAP, "env.start_mode=teleport"])


def test_missing_map_and_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(None, [f"env.map_path={tmp_path / 'nowhere.txt'}"])
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.cfg")


def test_environment_variables_fill_top_level_fields(monkeypatch):
    monkeypatch.setenv("OPTIONZERO_SEED", "42")
    assert load_config(None, [SMOKE_MAP]).seed == 42


def test_dumped_config_loads_back(tmp_path):
    config = load_config(None, [SMOKE_MAP, "option_length=4", "search.simulations=9", "debug=true"])
    path = tmp_path / "effective.cfg"
    path.write_text(dump_config(config))
    again = load_config(path)
    assert again.search == config.search
    assert again.model == config.model
    assert again.debug is True


def test_value_scale_follows_goal_reward_unless_set():
    assert load_config(None, [SMOKE_MAP]).model.value_scale == 200.0
    assert load_config(None, [SMOKE_MAP, "env.goal_reward=50"]).model.value_scale == 50.0
    assert load_config(None, [SMOKE_MAP, "model.value_scale=10"]).model.value_scale == 10.0
    assert load_config(None, [SMOKE_MAP]).training.max_grad_norm == 1.0
