"""
Recurrent PPO motion controller: observation encoding, the squashed-Gaussian
LSTM policy, the dual-rate control loop and single/grid training.
"""

from softfin.rl.environment import (
    TICK_PATTERN,
    Environment,
    PlantEnvironment,
    SurrogateEnvironment,
    TickBlock,
    Trajectory,
    dual_rate_rollout,
    ticks_for,
)
from softfin.rl.policy import (
    ActionSample,
    Controller,
    PolicyCheckpoint,
    PolicyNet,
    RandomActor,
    action_log_prob,
)
from softfin.rl.ppo import PPOConfig, UpdateDiagnostics, gae_advantages, ppo_update
from softfin.rl.state import DEFAULT_HISTORY, NEUTRAL_ACTION, encode_state, state_size
from softfin.rl.training import (
    DEFAULT_GRID_POINTS,
    GridBank,
    grid_select,
    train_grid,
    train_single,
)

__all__ = [
    "encode_state",
    "state_size",
    "NEUTRAL_ACTION",
    "DEFAULT_HISTORY",
    "PolicyNet",
    "PolicyCheckpoint",
    "RandomActor",
    "Controller",
    "ActionSample",
    "action_log_prob",
    "Environment",
    "PlantEnvironment",
    "SurrogateEnvironment",
    "TickBlock",
    "Trajectory",
    "TICK_PATTERN",
    "ticks_for",
    "dual_rate_rollout",
    "PPOConfig",
    "UpdateDiagnostics",
    "gae_advantages",
    "ppo_update",
    "DEFAULT_GRID_POINTS",
    "GridBank",
    "grid_select",
    "train_single",
    "train_grid",
]
