"""
Supervised training of the surrogate stages: seeded minibatch Adam on mean
squared error, a held-out split for early stopping, and a divergence guard.

Example Usage:

```python
posnet = train_posnet(train_logs, TrainConfig(seed=7))
posnet.curve.write_csv("out/surrogate/posnet_curve.csv")
```
"""

import csv
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from softfin.datagen import DataLog
from softfin.errors import ConfigurationError, TrainingDivergedError
from softfin.nn import AdamState, Network, adam_step
from softfin.surrogate.models import build_forcenet, build_posnet
from softfin.surrogate.windows import (
    Normalizer,
    concat_examples,
    forcenet_examples,
    posnet_examples,
    rest_examples,
)

logger = logging.getLogger(__name__)

PREDICT_BATCH = 512


@dataclass(frozen=True)
class TrainConfig:
    """
    Surrogate training knobs.

    rest_fraction: share of synthetic held-still windows added to the examples
    min_examples: fewest windowed examples accepted
    divergence_factor: abort once a training loss exceeds this times the initial loss
    """

    window: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    epochs: int = 50
    patience: int = 5
    holdout: float = 0.1
    stride: int = 1
    forcenet_hidden: int = 96
    dropout: float = 0.2
    rest_fraction: float = 0.05
    min_examples: int = 1000
    divergence_factor: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.holdout < 1.0:
            raise ConfigurationError(f"holdout must be in [0, 1), got {self.holdout}")
        if self.batch_size < 1 or self.epochs < 1 or self.stride < 1:
            raise ConfigurationError("batch_size, epochs and stride must be >= 1")
        if not 0.0 <= self.rest_fraction < 1.0:
            raise ConfigurationError("rest_fraction must be in [0, 1)")


@dataclass
class TrainingCurve:
    """
    Per-epoch losses (normalized units) and the epoch whose weights were kept.
    """

    name: str
    train_loss: List[float] = field(default_factory=list)
    validation_loss: List[float] = field(default_factory=list)
    best_epoch: int = -1

    def write_csv(self, path: str) -> None:
        """
        One row per epoch: epoch, train_loss, validation_loss.
        """
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["epoch", "train_loss", "validation_loss"])
            for epoch, train in enumerate(self.train_loss):
                validation = float("nan")
                if self.validation_loss:
                    validation = self.validation_loss[epoch]
                writer.writerow([epoch + 1, repr(train), repr(validation)])


def predict(network: Network, inputs: np.ndarray) -> np.ndarray:
    """
    Eval-mode forward in fixed-size chunks.
    """
    outputs = []
    for start in range(0, len(inputs), PREDICT_BATCH):
        out, _, _ = network.forward(inputs[start : start + PREDICT_BATCH], mode="eval")
        outputs.append(out)
    return np.concatenate(outputs, axis=0)


def _mse(prediction: np.ndarray, target: np.ndarray) -> float:
    return float(np.mean(np.sum((prediction - target) ** 2, axis=1)))


def fit(
    network: Network,
    inputs: np.ndarray,
    targets: np.ndarray,
    train_config: TrainConfig,
) -> TrainingCurve:
    """
    Minimize the per-example squared error summed over outputs, keeping the
    weights of the best validation epoch (or the last epoch without holdout).

    :raises ConfigurationError: With fewer than ``min_examples`` examples.
    :raises TrainingDivergedError: If a training loss exceeds
        ``divergence_factor`` times the initial loss.
    """
    count = len(inputs)
    if count == 0 or count < train_config.min_examples:
        raise ConfigurationError(
            f"{network.name} needs at least {max(1, train_config.min_examples)} "
            f"windowed examples, got {count}"
        )
    split_seq, shuffle_seq, dropout_seq = np.random.SeedSequence(
        [train_config.seed, 1]
    ).spawn(3)
    order = np.random.default_rng(split_seq).permutation(count)
    n_val = int(round(count * train_config.holdout)) if train_config.holdout else 0
    n_val = min(max(n_val, 1 if train_config.holdout else 0), count - 1)
    val_idx, train_idx = order[:n_val], order[n_val:]
    shuffle_rng = np.random.default_rng(shuffle_seq)
    dropout_rng = np.random.default_rng(dropout_seq)

    curve = TrainingCurve(network.name)
    initial = _mse(predict(network, inputs[train_idx]), targets[train_idx])
    state = AdamState(learning_rate=train_config.learning_rate)
    best_loss, best_params, stale = np.inf, network.snapshot(), 0
    for epoch in range(train_config.epochs):
        batch_losses = []
        permutation = train_idx[shuffle_rng.permutation(len(train_idx))]
        for start in range(0, len(permutation), train_config.batch_size):
            batch = permutation[start : start + train_config.batch_size]
            out, _, tape = network.forward(inputs[batch], mode="train", rng=dropout_rng)
            error = out - targets[batch]
            batch_losses.append(float(np.mean(np.sum(error**2, axis=1))))
            grads = network.backward(tape, 2.0 * error / len(batch))
            params = adam_step(network.parameters(), grads.params, state)
            network.load_parameters(params)
        train_loss = float(np.mean(batch_losses))
        curve.train_loss.append(train_loss)
        limit = train_config.divergence_factor * initial
        if not np.isfinite(train_loss) or train_loss > limit:
            raise TrainingDivergedError(
                f"{network.name} diverged at epoch {epoch + 1}: loss {train_loss:.4g} "
                f"vs initial {initial:.4g}"
            )
        monitored = train_loss
        if n_val:
            monitored = _mse(predict(network, inputs[val_idx]), targets[val_idx])
            curve.validation_loss.append(monitored)
        logger.debug(
            "%s epoch %d: train %.5g, monitored %.5g",
            network.name,
            epoch + 1,
            train_loss,
            monitored,
        )
        if monitored < best_loss:
            best_loss, best_params, stale = monitored, network.snapshot(), 0
            curve.best_epoch = epoch + 1
        else:
            stale += 1
            if n_val and stale >= train_config.patience:
                logger.info("%s stopped early after epoch %d", network.name, epoch + 1)
                break
    network.load_parameters(best_params)
    logger.info(
        "%s trained: best epoch %d, loss %.5g",
        network.name,
        curve.best_epoch,
        best_loss,
    )
    return curve


def _require_examples(name: str, count: int) -> None:
    if count == 0:
        raise ConfigurationError(
            f"{name}: the training logs yield no windowed examples"
        )


def _rest_count(examples: int, train_config: TrainConfig) -> int:
    fraction = train_config.rest_fraction
    return int(round(examples * fraction / (1.0 - fraction))) if fraction else 0


@dataclass
class PosNetFit:
    """
    A trained PosNet with its input and increment normalizers.
    """

    network: Network
    input_normalizer: Normalizer
    output_normalizer: Normalizer
    curve: TrainingCurve


@dataclass
class ForceNetFit:
    """
    A trained ForceNet with its input and force normalizers.
    """

    network: Network
    input_normalizer: Normalizer
    output_normalizer: Normalizer
    curve: TrainingCurve


def _posnet_data(
    logs: Sequence[DataLog], train_config: TrainConfig
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    parts = [
        posnet_examples(log, train_config.window, train_config.stride)
        for log in logs
    ]
    inputs, previous, target = concat_examples(parts)
    rest = _rest_count(len(inputs), train_config)
    if rest and len(inputs):
        rng = np.random.default_rng(np.random.SeedSequence([train_config.seed, 2]))
        angles = np.concatenate([log.theta for log in logs])
        pos_in, prev, held, _, _ = rest_examples(angles, train_config.window, rest, rng)
        inputs = np.concatenate([inputs, pos_in])
        previous = np.concatenate([previous, prev])
        target = np.concatenate([target, held])
    return inputs, previous, target


def train_posnet(
    logs: Sequence[DataLog], train_config: Optional[TrainConfig] = None
) -> PosNetFit:
    """
    Train PosNet on the train split: next-angle regression, learned as the
    normalized increment over the previous angle.
    """
    train_config = train_config or TrainConfig()
    inputs, previous, target = _posnet_data(logs, train_config)
    _require_examples("posnet", len(inputs))
    input_normalizer = Normalizer.fit(inputs.transpose(0, 2, 1))
    delta = (target - previous)[:, None]
    output_normalizer = Normalizer.fit(delta)
    network = build_posnet(train_config.window, seed=train_config.seed)
    x = input_normalizer.normalize(inputs.transpose(0, 2, 1)).transpose(0, 2, 1)
    y = output_normalizer.normalize(delta)
    curve = fit(network, x, y, train_config)
    return PosNetFit(network, input_normalizer, output_normalizer, curve)


def _forcenet_data(
    logs: Sequence[DataLog], train_config: TrainConfig
) -> Tuple[np.ndarray, np.ndarray]:
    parts = [
        forcenet_examples(log, train_config.window, train_config.stride) for log in logs
    ]
    inputs, target = concat_examples(parts)
    rest = _rest_count(len(inputs), train_config)
    if rest and len(inputs):
        rng = np.random.default_rng(np.random.SeedSequence([train_config.seed, 3]))
        angles = np.concatenate([log.theta for log in logs])
        _, _, _, force_in, zeros = rest_examples(angles, train_config.window, rest, rng)
        inputs = np.concatenate([inputs, force_in])
        target = np.concatenate([target, zeros])
    return inputs, target


def train_forcenet(
    logs: Sequence[DataLog], train_config: Optional[TrainConfig] = None
) -> ForceNetFit:
    """
    Train ForceNet on logged angle windows rather than PosNet predictions.
    """
    train_config = train_config or TrainConfig()
    inputs, target = _forcenet_data(logs, train_config)
    network = build_forcenet(
        train_config.forcenet_hidden, train_config.dropout, seed=train_config.seed + 1
    )
    _require_examples("forcenet", len(inputs))
    input_normalizer = Normalizer.fit(inputs)
    output_normalizer = Normalizer.fit(target)
    curve = fit(
        network,
        input_normalizer.normalize(inputs),
        output_normalizer.normalize(target),
        train_config,
    )
    return ForceNetFit(network, input_normalizer, output_normalizer, curve)

