"""
Learned stand-in for the plant: PosNet (commands -> fin angle) and ForceNet
(fin angle -> force), their training, rollout and evaluation.
"""

from softfin.surrogate.evaluation import (
    MetricsRow,
    evaluate_surrogate,
    read_metrics_table,
    write_metrics_table,
)
from softfin.surrogate.model import (
    LogPrediction,
    SurrogateModel,
    SurrogateSession,
    surrogate_rollout,
    train_surrogate,
)
from softfin.surrogate.models import build_forcenet, build_posnet
from softfin.surrogate.training import (
    TrainConfig,
    TrainingCurve,
    train_forcenet,
    train_posnet,
)
from softfin.surrogate.windows import Normalizer

__all__ = [
    "build_posnet",
    "build_forcenet",
    "Normalizer",
    "TrainConfig",
    "TrainingCurve",
    "train_posnet",
    "train_forcenet",
    "SurrogateModel",
    "SurrogateSession",
    "LogPrediction",
    "surrogate_rollout",
    "train_surrogate",
    "evaluate_surrogate",
    "MetricsRow",
    "write_metrics_table",
    "read_metrics_table",
]
