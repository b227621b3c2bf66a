"""
Unit tests for `softfin.settings` module.
"""

import pytest

from softfin import settings as lab_settings
from softfin.datagen import DatasetConfig
from softfin.plant import PlantParams
from softfin.reward import RewardParams
from softfin.rl.ppo import PPOConfig
from softfin.rl.training import DEFAULT_GRID_POINTS
from softfin.surrogate.training import TrainConfig


@pytest.fixture(name="config_file")
def fixture_config_file(tmp_path):
    def write(text):
        path = tmp_path / "lab.conf"
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


class TestDefaults:
    def test_Should_match_module_defaults_When_nothing_is_overridden(self):
        settings = lab_settings.load_settings()

        assert lab_settings.plant_params(settings) == PlantParams()
        assert lab_settings.dataset_config(settings) == DatasetConfig()
        assert lab_settings.train_config(settings) == TrainConfig()
        assert lab_settings.reward_params(settings) == RewardParams()
        assert lab_settings.ppo_config(settings) == PPOConfig()

    def test_Should_use_table_references_When_grid_and_evaluation_are_default(self):
        settings = lab_settings.load_settings()

        assert settings.rl_grid_points() == list(DEFAULT_GRID_POINTS)
        assert settings.eval_references() == list(DEFAULT_GRID_POINTS)
        assert lab_settings.eval_seeds(settings) == [0, 1, 2]

    def test_Should_list_every_key_once_When_described(self):
        described = lab_settings.describe(lab_settings.load_settings())
        keys = [key for key, _ in described]

        assert keys == list(lab_settings.setting_keys())
        assert len(set(keys)) == len(keys)
        assert ("seed", 0) in described
        assert ("out", "softfin-out") in described


class TestPrecedence:
    def test_Should_read_environment_When_variable_is_set(self, monkeypatch):
        monkeypatch.setenv("SOFTFIN_PPO_CLIP", "0.3")

        settings = lab_settings.load_settings()

        assert settings.ppo_clip() == 0.3

    def test_Should_prefer_file_over_environment_When_both_are_set(
        self, monkeypatch, config_file
    ):
        monkeypatch.setenv("SOFTFIN_PPO_CLIP", "0.3")
        path = config_file("# lab settings\nppo_clip = 0.25\n")

        settings = lab_settings.load_settings(path)

        assert settings.ppo_clip() == 0.25

    def test_Should_prefer_overrides_over_file_When_both_are_set(self, config_file):
        path = config_file("seed = 5\nout = from-file\n")

        settings = lab_settings.load_settings(path, overrides={"seed": 7, "out": None})

        assert settings.seed() == 7
        assert settings.out() == "from-file"

    def test_Should_carry_run_seed_into_surrogate_training_When_seed_is_set(self):
        settings = lab_settings.load_settings(overrides={"seed": 11})

        assert lab_settings.train_config(settings).seed == 11


class TestValidation:
    def test_Should_raise_When_file_names_unknown_key(self, config_file):
        path = config_file("ppo_clipp = 0.3\n")

        with pytest.raises(ValueError, match="ppo_clipp"):
            lab_settings.load_settings(path)

    def test_Should_raise_When_file_is_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            lab_settings.load_settings(str(tmp_path / "absent.conf"))

    @pytest.mark.parametrize(
        "text, getter",
        [
            ("ppo_clip = 1.5\n", "ppo_clip"),
            ("log_level = LOUD\n", "log_level"),
            ("surrogate_window = 4\n", "surrogate_window"),
            ("eval_steps = 5\n", "eval_steps"),
            ("eval_seeds = 0,1.7\n", "eval_seeds"),
            ("eval_average_window = 0\n", "eval_average_window"),
            ("rl_grid_points = 1,2,3\n", "rl_grid_points"),
        ],
    )
    def test_Should_name_field_When_value_is_invalid(self, config_file, text, getter):
        settings = lab_settings.load_settings(config_file(text))

        with pytest.raises(ValueError, match=f"Invalid value for field {getter}"):
            getattr(settings, getter)()

    def test_Should_raise_When_training_range_is_reversed(self, config_file):
        settings = lab_settings.load_settings(config_file("rl_fx_range = 3,0\n"))

        with pytest.raises(ValueError, match="rl_fx_range"):
            lab_settings.ppo_config(settings)

    def test_Should_parse_lists_When_file_sets_them(self, config_file):
        path = config_file("eval_references = 2,0; 1,-1\neval_seeds = 4,5\n")

        settings = lab_settings.load_settings(path)

        assert settings.eval_references() == [(2.0, 0.0), (1.0, -1.0)]
        assert lab_settings.eval_seeds(settings) == [4, 5]
