"""
Softfin: a desk-scale laboratory for learning to control the force of a soft
fin. A synthetic plant stands in for the rig; a learned surrogate (PosNet and
ForceNet) is built from its logs; recurrent PPO controllers are trained on the
surrogate and evaluated on the plant.

Example Usage:

```python
import softfin

dataset = softfin.generate_dataset(softfin.DatasetConfig(), seed=0)
logs = softfin.training_logs(dataset)
model, _ = softfin.train_surrogate(logs, softfin.TrainConfig())
bank = softfin.train_grid(model, softfin.DEFAULT_GRID_POINTS, softfin.PPOConfig())
policy = softfin.grid_select(bank, (2.0, 0.0)).policy
summary, _ = softfin.run_evaluation(policy, softfin.PlantParams(), (2.0, 0.0), seed=0)
```
"""

from softfin.__version__ import __version__
from softfin.datagen import (
    DataLog,
    DatasetConfig,
    generate_dataset,
    held_out_logs,
    read_dataset,
    training_logs,
    write_dataset,
)
from softfin.errors import (
    ConfigurationError,
    DatasetError,
    EvaluationError,
    InfeasibleBandError,
    NonFiniteError,
    PlantFault,
    SoftfinError,
    StaleTapeError,
    TrainingDivergedError,
)
from softfin.evaluation import EvalSummary, compare_controllers, run_evaluation
from softfin.metrics import dtw, mae, moving_average, rmse
from softfin.plant import FinPlant, MotorCommand, PlantParams, plant_reset, plant_step
from softfin.plots import emit_plots
from softfin.reward import RewardParams, sobolev_smoothness, step_reward, window_error
from softfin.rl import (
    DEFAULT_GRID_POINTS,
    GridBank,
    PolicyCheckpoint,
    PolicyNet,
    PPOConfig,
    RandomActor,
    dual_rate_rollout,
    encode_state,
    gae_advantages,
    grid_select,
    ppo_update,
    train_grid,
    train_single,
)
from softfin.surrogate import (
    SurrogateModel,
    TrainConfig,
    evaluate_surrogate,
    surrogate_rollout,
    train_forcenet,
    train_posnet,
    train_surrogate,
)

__all__ = [
    "__version__",
    # Plant and data
    "FinPlant",
    "MotorCommand",
    "PlantParams",
    "plant_reset",
    "plant_step",
    "DataLog",
    "DatasetConfig",
    "generate_dataset",
    "write_dataset",
    "read_dataset",
    "training_logs",
    "held_out_logs",
    # Surrogate
    "SurrogateModel",
    "TrainConfig",
    "train_posnet",
    "train_forcenet",
    "train_surrogate",
    "surrogate_rollout",
    "evaluate_surrogate",
    # Metrics and reward
    "rmse",
    "mae",
    "dtw",
    "moving_average",
    "RewardParams",
    "sobolev_smoothness",
    "window_error",
    "step_reward",
    # Control
    "encode_state",
    "PolicyNet",
    "PolicyCheckpoint",
    "RandomActor",
    "PPOConfig",
    "dual_rate_rollout",
    "gae_advantages",
    "ppo_update",
    "train_single",
    "train_grid",
    "GridBank",
    "grid_select",
    "DEFAULT_GRID_POINTS",
    # Evaluation
    "EvalSummary",
    "run_evaluation",
    "compare_controllers",
    "emit_plots",
    # Errors
    "SoftfinError",
    "ConfigurationError",
    "StaleTapeError",
    "NonFiniteError",
    "PlantFault",
    "DatasetError",
    "InfeasibleBandError",
    "TrainingDivergedError",
    "EvaluationError",
]
