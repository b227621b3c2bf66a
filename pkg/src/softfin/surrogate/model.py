"""
The composed surrogate: PosNet turns commands into fin angles one tick at a
time, ForceNet turns the angle history into force. Nothing here touches the
plant.

Example Usage:

```python
model = SurrogateModel.load("out/surrogate/surrogate.ckpt")
session = model.session()
theta, forces = session.advance(MotorCommand(0.8, 2.5), n_ticks=33)
```
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from softfin.datagen import DataLog
from softfin.errors import ConfigurationError, NonFiniteError
from softfin.nn import Network, load_checkpoint, save_checkpoint
from softfin.plant import OMEGA_MIN, MotorCommand
from softfin.surrogate.models import (
    REFERENCE_FORCENET_PARAMETERS,
    REFERENCE_POSNET_PARAMETERS,
)
from softfin.surrogate.training import (
    ForceNetFit,
    PosNetFit,
    TrainConfig,
    TrainingCurve,
    predict,
    train_forcenet,
    train_posnet,
)
from softfin.surrogate.windows import (
    Normalizer,
    forcenet_examples,
    forcenet_inputs_from_theta,
    posnet_examples,
)

logger = logging.getLogger(__name__)

CommandStream = Union[Sequence[MotorCommand], np.ndarray]
NORMALIZERS = ("posnet_input", "posnet_output", "forcenet_input", "forcenet_output")


def _finite(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"{what} produced a non-finite value", layer=what)
    return values


@dataclass
class LogPrediction:
    """
    One-step predictions from logged inputs over a log, aligned with
    ``log.theta[offset:]`` and ``log.forces[offset:]``.
    """

    offset: int
    theta: np.ndarray
    forces: np.ndarray


@dataclass
class SurrogateModel:
    """
    PosNet and ForceNet weights, their window length and normalization
    constants.
    """

    posnet: Network
    forcenet: Network
    window: int
    posnet_input: Normalizer
    posnet_output: Normalizer
    forcenet_input: Normalizer
    forcenet_output: Normalizer

    @classmethod
    def from_fits(cls, posnet: PosNetFit, forcenet: ForceNetFit, window: int):
        """
        Assemble a model from the two training results.
        """
        return cls(
            posnet.network,
            forcenet.network,
            window,
            posnet.input_normalizer,
            posnet.output_normalizer,
            forcenet.input_normalizer,
            forcenet.output_normalizer,
        )

    def parameter_counts(self) -> Dict[str, Tuple[int, int]]:
        """
        (ours, published) parameter counts per stage.
        """
        return {
            "PosNet": (self.posnet.parameter_count, REFERENCE_POSNET_PARAMETERS),
            "ForceNet": (self.forcenet.parameter_count, REFERENCE_FORCENET_PARAMETERS),
        }

    def posnet_batch(self, inputs: np.ndarray, previous: np.ndarray) -> np.ndarray:
        """
        Next angles for raw (N, 3, W) windows whose last previous angle is
        ``previous``.
        """
        x = self.posnet_input.normalize(inputs.transpose(0, 2, 1)).transpose(0, 2, 1)
        delta = self.posnet_output.denormalize(predict(self.posnet, x))[:, 0]
        return _finite(np.asarray(previous, dtype=np.float64) + delta, "posnet")

    def forcenet_batch(self, inputs: np.ndarray) -> np.ndarray:
        """
        Forces (N, 2) for raw (N, W, 2) angle/velocity windows.
        """
        out = predict(self.forcenet, self.forcenet_input.normalize(inputs))
        return _finite(self.forcenet_output.denormalize(out), "forcenet")

    def posnet_step(self, commands: np.ndarray, theta: np.ndarray) -> float:
        """
        Next angle from the last W commands (W, 2) and the last W angles.

        :raises ConfigurationError: If either window is not W samples long.
        :raises NonFiniteError: On non-finite input or output.
        """
        commands = np.asarray(commands, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        if commands.shape != (self.window, 2) or theta.shape != (self.window,):
            raise ConfigurationError(
                f"posnet_step needs ({self.window}, 2) commands and {self.window} "
                f"angles, got {commands.shape} and {theta.shape}"
            )
        inputs = np.concatenate([commands.T, theta[None, :]], axis=0)[None]
        return float(self.posnet_batch(inputs, theta[-1:])[0])

    def forcenet_step(self, theta: np.ndarray) -> Tuple[float, float]:
        """
        Force at the end of an angle window of W + 1 samples; the first one
        only seeds the velocity difference.

        :raises ConfigurationError: On a window of the wrong length.
        """
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.window + 1,):
            raise ConfigurationError(
                f"forcenet_step needs {self.window + 1} angles, got {theta.shape}"
            )
        fx, fy = self.forcenet_batch(forcenet_inputs_from_theta(theta, self.window))[0]
        return float(fx), float(fy)

    def predict_log(self, log: DataLog) -> LogPrediction:
        """
        One-step PosNet predictions from logged commands and angles, and
        ForceNet predictions from logged angles.
        """
        inputs, previous, _ = posnet_examples(log, self.window)
        force_inputs, _ = forcenet_examples(log, self.window)
        if len(inputs) == 0:
            raise ConfigurationError(
                f"log of {len(log)} samples is shorter than the window {self.window}"
            )
        return LogPrediction(
            self.window,
            self.posnet_batch(inputs, previous),
            self.forcenet_batch(force_inputs),
        )

    def session(self, theta0: float = 0.0) -> "SurrogateSession":
        """
        Fresh rollout state starting from rest at ``theta0``.
        """
        return SurrogateSession(self, theta0)

    def save(self, path: str) -> int:
        """
        Write both networks and the normalization constants.

        :return: Bytes written.
        """
        metadata = {"kind": "surrogate", "window": str(self.window)}
        for name in NORMALIZERS:
            mean, std = getattr(self, name).as_text()
            metadata[f"{name}_mean"] = mean
            metadata[f"{name}_std"] = std
        size = save_checkpoint(
            path, {"posnet": self.posnet, "forcenet": self.forcenet}, metadata
        )
        logger.info("Saved surrogate to %s (%d bytes)", path, size)
        return size

    @classmethod
    def load(cls, path: str) -> "SurrogateModel":
        """
        Read a model written by ``save``.

        :raises FileNotFoundError: If ``path`` does not exist.
        :raises ConfigurationError: If it is not a surrogate checkpoint.
        """
        networks, metadata = load_checkpoint(path)
        if metadata.get("kind") != "surrogate" or set(networks) != {
            "posnet",
            "forcenet",
        }:
            raise ConfigurationError(f"{path} is not a surrogate checkpoint")
        try:
            normalizers = {
                name: Normalizer.from_text(
                    metadata[f"{name}_mean"], metadata[f"{name}_std"]
                )
                for name in NORMALIZERS
            }
            window = int(metadata["window"])
        except (KeyError, ValueError) as e:
            raise ConfigurationError(
                f"{path}: incomplete surrogate metadata ({e})"
            ) from e
        return cls(
            networks["posnet"],
            networks["forcenet"],
            window,
            **normalizers,
        )


class SurrogateSession:
    """
    Rolling buffers of one surrogate rollout. At the start the history is
    padded with the resting angle and the hold command at that angle.
    """

    def __init__(self, model: SurrogateModel, theta0: float = 0.0):
        self.model = model
        window = model.window
        self._commands = np.tile([theta0, OMEGA_MIN], (window, 1)).astype(np.float64)
        # W + 1 angles: PosNet reads the last W, ForceNet the full span.
        self._theta = np.full(window + 1, float(theta0))
        self.ticks = 0

    @property
    def theta(self) -> float:
        """
        Latest predicted angle.
        """
        return float(self._theta[-1])

    def advance(
        self, command: MotorCommand, n_ticks: int
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Hold ``command`` for ``n_ticks`` ticks.

        :return: Angles (n,) and forces (n, 2) for the new ticks.
        """
        return self.advance_stream(np.tile(command.as_tuple(), (n_ticks, 1)))

    def advance_stream(self, commands: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Apply one command per tick from a (n, 2) array.
        """
        commands = np.asarray(commands, dtype=np.float64).reshape(-1, 2)
        n_ticks = len(commands)
        window = self.model.window
        span = np.concatenate([self._theta, np.empty(n_ticks)])
        command_span = np.concatenate([self._commands, commands])
        for tick in range(n_ticks):
            recent = span[tick + 1 : tick + 1 + window]
            inputs = np.concatenate(
                [command_span[tick + 1 : tick + 1 + window].T, recent[None, :]]
            )[None]
            span[window + 1 + tick] = self.model.posnet_batch(inputs, recent[-1:])[0]
        forces = self.model.forcenet_batch(
            forcenet_inputs_from_theta(span[1:], window)
        )
        self._theta = span[-(window + 1) :].copy()
        self._commands = command_span[-window:].copy()
        self.ticks += n_ticks
        return span[window + 1 :].copy(), forces


def _command_array(commands: CommandStream) -> np.ndarray:
    if isinstance(commands, np.ndarray):
        return np.asarray(commands, dtype=np.float64).reshape(-1, 2)
    return np.array([command.as_tuple() for command in commands], dtype=np.float64)


def surrogate_rollout(
    model: SurrogateModel, commands: CommandStream, n_ticks: int, theta0: float = 0.0
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Autoregressive rollout from rest over ``n_ticks`` ticks.

    :param commands: One command per tick, as MotorCommands or a (n, 2) array.
    :return: Forces (n_ticks, 2) and angles (n_ticks,).
    :raises ValueError: If fewer than ``n_ticks`` commands are given.
    """
    stream = _command_array(commands)
    if len(stream) < n_ticks:
        raise ValueError(f"{n_ticks} ticks need {n_ticks} commands, got {len(stream)}")
    theta, forces = model.session(theta0).advance_stream(stream[:n_ticks])
    return forces, theta


def train_surrogate(
    logs: Sequence[DataLog], train_config: TrainConfig
) -> Tuple[SurrogateModel, Dict[str, TrainingCurve]]:
    """
    Train both stages on the train split and assemble the model.
    """
    posnet = train_posnet(logs, train_config)
    forcenet = train_forcenet(logs, train_config)
    model = SurrogateModel.from_fits(posnet, forcenet, train_config.window)
    for name, (ours, reference) in model.parameter_counts().items():
        logger.info("%s parameters: %d (published model: %d)", name, ours, reference)
    return model, {"posnet": posnet.curve, "forcenet": forcenet.curve}
