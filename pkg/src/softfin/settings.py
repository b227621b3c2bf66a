"""
Every tunable of the lab, as one settings class.

Values come, first hit wins, from explicit overrides (command-line flags),
the ``--config`` key-value file, ``SOFTFIN_<KEY>`` environment variables and
finally the defaults below. The helpers at the bottom turn a settings object
into the dataclasses the lab modules take.

Example Usage:

```python
settings = load_settings("lab.conf", overrides={"seed": 7})
plant = plant_params(settings)
settings.ppo_learning_rate()  # 0.0003 unless overridden
```
"""

import logging
from typing import Any, Dict, List, Mapping, Optional, Tuple

from softfin.config import (
    EnvAdapter,
    KeyValueFileAdapter,
    MappingAdapter,
    config,
    field,
    field_names,
    use_adapters,
)
from softfin.config.transformer import (
    float_list,
    float_pairs,
    int_list,
    floating,
    integer,
    string,
)
from softfin.config.validations import is_in_choices, is_in_range, min_length
from softfin.datagen import DatasetConfig
from softfin.plant import PlantParams
from softfin.reward import RewardParams
from softfin.rl.ppo import PPOConfig
from softfin.surrogate.training import TrainConfig

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
TABLE_REFERENCES = "1,-1;2,-1;2,0;3,0;1,1;2,1"


@config([EnvAdapter(env_prefix="SOFTFIN_")], use_defaults=True)
class Settings:
    """
    Lab settings; each getter returns its default.
    """

    # Run

    @integer()
    @field(name="seed")
    def seed(self) -> int:
        return 0

    @string()
    @field(name="out")
    def out(self) -> str:
        return "softfin-out"

    @is_in_choices(LOG_LEVELS)
    @string()
    @field(name="log_level")
    def log_level(self) -> str:
        return "INFO"

    # Plant

    @is_in_range(0.0, None, left_inclusive=False)
    @floating()
    @field(name="plant_c_n")
    def plant_c_n(self) -> float:
        return 0.8

    @is_in_range(0.0, None)
    @floating()
    @field(name="plant_c_a")
    def plant_c_a(self) -> float:
        return 0.05

    @is_in_range(0.0, None, left_inclusive=False)
    @floating()
    @field(name="plant_tau")
    def plant_tau(self) -> float:
        return 0.12

    @is_in_range(0.0, None, left_inclusive=False)
    @floating()
    @field(name="plant_a_max")
    def plant_a_max(self) -> float:
        return 40.0

    @is_in_range(0.0, None)
    @floating()
    @field(name="plant_sigma")
    def plant_sigma(self) -> float:
        return 0.05

    # Dataset

    @is_in_range(1, None)
    @integer()
    @field(name="data_train_logs")
    def data_train_logs(self) -> int:
        return 20

    @is_in_range(1, None)
    @integer()
    @field(name="data_test_logs")
    def data_test_logs(self) -> int:
        return 3

    @is_in_range(100, None)
    @integer()
    @field(name="data_log_samples")
    def data_log_samples(self) -> int:
        return 2000

    @is_in_range(0.0, None, left_inclusive=False)
    @floating()
    @field(name="data_command_timeout")
    def data_command_timeout(self) -> float:
        return 3.0

    @is_in_range(0.0, None, left_inclusive=False)
    @floating()
    @field(name="data_reach_tolerance")
    def data_reach_tolerance(self) -> float:
        return 0.01

    # Surrogate

    @is_in_range(9, None)
    @integer()
    @field(name="surrogate_window")
    def surrogate_window(self) -> int:
        return 100

    @is_in_range(1, None)
    @integer()
    @field(name="surrogate_batch_size")
    def surrogate_batch_size(self) -> int:
        return 64

    @is_in_range(0.0, None, left_inclusive=False)
    @floating()
    @field(name="surrogate_learning_rate")
    def surrogate_learning_rate(self) -> float:
        return 1e-3

    @is_in_range(1, None)
    @integer()
    @field(name="surrogate_epochs")
    def surrogate_epochs(self) -> int:
        return 50

    @is_in_range(1, None)
    @integer()
    @field(name="surrogate_patience")
    def surrogate_patience(self) -> int:
        return 5

    @is_in_range(0.0, 1.0, right_inclusive=False)
    @floating()
    @field(name="surrogate_holdout")
    def surrogate_holdout(self) -> float:
        return 0.1

    @is_in_range(1, None)
    @integer()
    @field(name="surrogate_stride")
    def surrogate_stride(self) -> int:
        return 1

    @is_in_range(1, None)
    @integer()
    @field(name="surrogate_forcenet_hidden")
    def surrogate_forcenet_hidden(self) -> int:
        return 96

    @is_in_range(0.0, 1.0, right_inclusive=False)
    @floating()
    @field(name="surrogate_dropout")
    def surrogate_dropout(self) -> float:
        return 0.2

    @is_in_range(0.0, 1.0, right_inclusive=False)
    @floating()
    @field(name="surrogate_rest_fraction")
    def surrogate_rest_fraction(self) -> float:
        return 0.05

    @is_in_range(1, None)
    @integer()
    @field(name="surrogate_min_examples")
    def surrogate_min_examples(self) -> int:
        return 1000

    @is_in_range(1.0, None, left_inclusive=False)
    @floating()
    @field(name="surrogate_divergence_factor")
    def surrogate_divergence_factor(self) -> float:
        return 10.0

    @is_in_range(0, None)
    @integer()
    @field(name="surrogate_dtw_band")
    def surrogate_dtw_band(self) -> int:
        return 100

    # Reward

    @is_in_range(0.0, None)
    @floating()
    @field(name="reward_w_x")
    def reward_w_x(self) -> float:
        return 1.0

    @is_in_range(0.0, None)
    @floating()
    @field(name="reward_w_y")
    def reward_w_y(self) -> float:
        return 1.0

    @is_in_range(0.0, None)
    @floating()
    @field(name="reward_lambda_x")
    def reward_lambda_x(self) -> float:
        return 0.05

    @is_in_range(0.0, None)
    @floating()
    @field(name="reward_lambda_y")
    def reward_lambda_y(self) -> float:
        return 0.05

    @is_in_range(2, None)
    @integer()
    @field(name="reward_window")
    def reward_window(self) -> int:
        return 200

    # PPO

    @is_in_range(0.0, 1.0, left_inclusive=False)
    @floating()
    @field(name="ppo_gamma")
    def ppo_gamma(self) -> float:
        return 0.99

    @is_in_range(0.0, 1.0, left_inclusive=False)
    @floating()
    @field(name="ppo_lambda")
    def ppo_lambda(self) -> float:
        return 0.95

    @is_in_range(0.0, 1.0, left_inclusive=False, right_inclusive=False)
    @floating()
    @field(name="ppo_clip")
    def ppo_clip(self) -> float:
        return 0.2

    @is_in_range(1, None)
    @integer()
    @field(name="ppo_epochs")
    def ppo_epochs(self) -> int:
        return 4

    @is_in_range(1, None)
    @integer()
    @field(name="ppo_horizon")
    def ppo_horizon(self) -> int:
        return 256

    @is_in_range(1, None)
    @integer()
    @field(name="ppo_minibatch")
    def ppo_minibatch(self) -> int:
        return 64

    @is_in_range(1, None)
    @integer()
    @field(name="ppo_sequence_length")
    def ppo_sequence_length(self) -> int:
        return 16

    @is_in_range(0.0, None)
    @floating()
    @field(name="ppo_entropy_coef")
    def ppo_entropy_coef(self) -> float:
        return 0.005

    @is_in_range(0.0, None)
    @floating()
    @field(name="ppo_value_coef")
    def ppo_value_coef(self) -> float:
        return 0.5

    @is_in_range(0.0, None, left_inclusive=False)
    @floating()
    @field(name="ppo_learning_rate")
    def ppo_learning_rate(self) -> float:
        return 3e-4

    @is_in_range(0.0, None)
    @floating()
    @field(name="ppo_max_grad_norm")
    def ppo_max_grad_norm(self) -> float:
        return 0.5

    @is_in_range(0.0, None, left_inclusive=False)
    @floating()
    @field(name="ppo_target_kl")
    def ppo_target_kl(self) -> float:
        return 0.5

    @is_in_range(1, None)
    @integer()
    @field(name="rl_single_steps")
    def rl_single_steps(self) -> int:
        return 30000

    @is_in_range(1, None)
    @integer()
    @field(name="rl_grid_steps")
    def rl_grid_steps(self) -> int:
        return 10000

    @is_in_range(1, None)
    @integer()
    @field(name="rl_episode_steps")
    def rl_episode_steps(self) -> int:
        return 90

    @is_in_range(0, None)
    @integer()
    @field(name="rl_history")
    def rl_history(self) -> int:
        return 4

    @is_in_range(1, None)
    @integer()
    @field(name="rl_hidden")
    def rl_hidden(self) -> int:
        return 64

    @min_length(2)
    @float_list()
    @field(name="rl_fx_range")
    def rl_fx_range(self) -> str:
        return "0,3"

    @min_length(2)
    @float_list()
    @field(name="rl_fy_range")
    def rl_fy_range(self) -> str:
        return "-1,1"

    @min_length(1)
    @float_pairs()
    @field(name="rl_grid_points")
    def rl_grid_points(self) -> str:
        return TABLE_REFERENCES

    # Evaluation

    @is_in_range(6, None)
    @integer()
    @field(name="eval_steps")
    def eval_steps(self) -> int:
        return 90

    @is_in_range(1, None)
    @integer()
    @field(name="eval_average_window")
    def eval_average_window(self) -> int:
        return 200

    @min_length(1)
    @float_pairs()
    @field(name="eval_references")
    def eval_references(self) -> str:
        return TABLE_REFERENCES

    @min_length(1)
    @int_list()
    @field(name="eval_seeds")
    def eval_seeds(self) -> str:
        return "0,1,2"


def setting_keys() -> Dict[str, str]:
    """
    Key to getter name, in declaration order.
    """
    return field_names(Settings)


def load_settings(
    config_path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None
) -> Settings:
    """
    Settings with overrides, then ``config_path``, then the environment,
    then defaults.

    :raises FileNotFoundError: If ``config_path`` does not exist.
    :raises ValueError: If the file names an unknown key.
    """
    adapters = [MappingAdapter(overrides or {})]
    if config_path is not None:
        file_adapter = KeyValueFileAdapter([config_path])
        file_adapter.check_keys(setting_keys())
        adapters.append(file_adapter)
    return use_adapters(Settings(), *adapters)


def describe(settings: Settings) -> List[Tuple[str, Any]]:
    """
    (key, effective value) for every setting.
    """
    return [(key, getattr(settings, name)()) for key, name in setting_keys().items()]


def _range(values: List[float], key: str) -> Tuple[float, float]:
    if len(values) != 2 or values[0] > values[1]:
        raise ValueError(f"{key} must be 'low,high', got {values}")
    return values[0], values[1]


def plant_params(settings: Settings) -> PlantParams:
    """
    Plant parameters.
    """
    return PlantParams(
        c_n=settings.plant_c_n(),
        c_a=settings.plant_c_a(),
        tau=settings.plant_tau(),
        a_max=settings.plant_a_max(),
        sigma=settings.plant_sigma(),
    )


def dataset_config(settings: Settings) -> DatasetConfig:
    """
    Dataset size and command re-issue rule.
    """
    return DatasetConfig(
        train_logs=settings.data_train_logs(),
        test_logs=settings.data_test_logs(),
        log_samples=settings.data_log_samples(),
        command_timeout=settings.data_command_timeout(),
        reach_tolerance=settings.data_reach_tolerance(),
    )


def train_config(settings: Settings) -> TrainConfig:
    """
    Surrogate training knobs; the seed is the run seed.
    """
    return TrainConfig(
        window=settings.surrogate_window(),
        batch_size=settings.surrogate_batch_size(),
        learning_rate=settings.surrogate_learning_rate(),
        epochs=settings.surrogate_epochs(),
        patience=settings.surrogate_patience(),
        holdout=settings.surrogate_holdout(),
        stride=settings.surrogate_stride(),
        forcenet_hidden=settings.surrogate_forcenet_hidden(),
        dropout=settings.surrogate_dropout(),
        rest_fraction=settings.surrogate_rest_fraction(),
        min_examples=settings.surrogate_min_examples(),
        divergence_factor=settings.surrogate_divergence_factor(),
        seed=settings.seed(),
    )


def reward_params(settings: Settings) -> RewardParams:
    """
    Reward weights and window.
    """
    return RewardParams(
        w_x=settings.reward_w_x(),
        w_y=settings.reward_w_y(),
        lambda_x=settings.reward_lambda_x(),
        lambda_y=settings.reward_lambda_y(),
        n=settings.reward_window(),
    )


def ppo_config(settings: Settings) -> PPOConfig:
    """
    PPO hyperparameters and training budgets.
    """
    return PPOConfig(
        gamma=settings.ppo_gamma(),
        lam=settings.ppo_lambda(),
        clip=settings.ppo_clip(),
        epochs=settings.ppo_epochs(),
        horizon=settings.ppo_horizon(),
        minibatch=settings.ppo_minibatch(),
        sequence_length=settings.ppo_sequence_length(),
        entropy_coef=settings.ppo_entropy_coef(),
        value_coef=settings.ppo_value_coef(),
        learning_rate=settings.ppo_learning_rate(),
        max_grad_norm=settings.ppo_max_grad_norm(),
        target_kl=settings.ppo_target_kl(),
        single_steps=settings.rl_single_steps(),
        grid_steps=settings.rl_grid_steps(),
        episode_steps=settings.rl_episode_steps(),
        history=settings.rl_history(),
        hidden=settings.rl_hidden(),
        fx_range=_range(settings.rl_fx_range(), "rl_fx_range"),
        fy_range=_range(settings.rl_fy_range(), "rl_fy_range"),
    )


def eval_seeds(settings: Settings) -> List[int]:
    """
    Evaluation seeds as integers.
    """
    return list(settings.eval_seeds())
