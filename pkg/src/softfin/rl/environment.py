"""
The dual-rate control loop: one decision every 33, 33, 34 ticks of a 100 Hz
simulation, i.e. exactly 3 Hz on average.

The loop only sees the Environment interface. Training runs it against the
surrogate, evaluation against the plant; the loop code is the same.

Example Usage:

```python
env = SurrogateEnvironment(SurrogateModel.load("out/surrogate/surrogate.ckpt"))
trajectory = dual_rate_rollout(policy, env, (2.0, 0.0), 90, rng=rng, seed=3)
trajectory.duration  # 30.0
```
"""

import logging
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from softfin.errors import ConfigurationError
from softfin.plant import SAMPLE_PERIOD, FinPlant, MotorCommand, PlantParams
from softfin.reward import ForceWindow, RewardParams, step_reward
from softfin.rl.policy import Controller
from softfin.rl.state import DEFAULT_HISTORY, encode_state
from softfin.surrogate.model import SurrogateModel

logger = logging.getLogger(__name__)

TICK_PATTERN = (33, 33, 34)
TICKS_PER_CYCLE = sum(TICK_PATTERN)


def ticks_for(n_control_steps: int) -> int:
    """
    Simulation ticks consumed by ``n_control_steps`` decisions.
    """
    cycles, rest = divmod(n_control_steps, len(TICK_PATTERN))
    return cycles * TICKS_PER_CYCLE + sum(TICK_PATTERN[:rest])


@dataclass
class TickBlock:
    """
    What an environment reports for a run of ticks under one command.
    """

    theta: np.ndarray
    forces: np.ndarray


class Environment(ABC):
    """
    A 100 Hz force-producing system driven by held motor commands.
    """

    name = "environment"

    @abstractmethod
    def reset(self, seed: int) -> float:
        """
        Return to rest.

        :return: The fin angle at rest.
        """

    @abstractmethod
    def advance(self, command: MotorCommand, n_ticks: int) -> TickBlock:
        """
        Hold ``command`` for ``n_ticks`` ticks.
        """


class PlantEnvironment(Environment):
    """
    The synthetic plant; used for evaluation only.
    """

    name = "plant"

    def __init__(self, params: Optional[PlantParams] = None):
        self.plant = FinPlant(params)

    def reset(self, seed: int) -> float:
        return self.plant.reset(seed).theta_m

    def advance(self, command: MotorCommand, n_ticks: int) -> TickBlock:
        theta = np.empty(n_ticks)
        forces = np.empty((n_ticks, 2))
        for tick in range(n_ticks):
            sample = self.plant.step(command)
            theta[tick] = self.plant.state.theta_m
            forces[tick] = (sample.fx, sample.fy)
        return TickBlock(theta, forces)


class SurrogateEnvironment(Environment):
    """
    The learned surrogate; used for training only.
    """

    name = "surrogate"

    def __init__(self, model: SurrogateModel):
        self.model = model
        self.session = model.session()

    def reset(self, seed: int) -> float:
        # The surrogate is deterministic; the seed only matters for the plant.
        del seed
        self.session = self.model.session()
        return self.session.theta

    def advance(self, command: MotorCommand, n_ticks: int) -> TickBlock:
        theta, forces = self.session.advance(command, n_ticks)
        return TickBlock(theta, forces)


@dataclass
class Trajectory:
    """
    One episode: per control step records plus the 100 Hz trace.

    hidden/cell hold the policy's recurrent state before each decision; they
    stay empty for memoryless controllers.
    """

    reference: Tuple[float, float]
    observations: List[np.ndarray] = field(default_factory=list)
    pre_squash: List[np.ndarray] = field(default_factory=list)
    actions: List[np.ndarray] = field(default_factory=list)
    log_probs: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    hidden: List[np.ndarray] = field(default_factory=list)
    cell: List[np.ndarray] = field(default_factory=list)
    tick_counts: List[int] = field(default_factory=list)
    theta: List[np.ndarray] = field(default_factory=list)
    forces: List[np.ndarray] = field(default_factory=list)
    bootstrap_value: float = 0.0

    def __len__(self) -> int:
        return len(self.rewards)

    @property
    def ticks(self) -> int:
        """
        Simulation ticks so far.
        """
        return int(sum(self.tick_counts))

    @property
    def duration(self) -> float:
        """
        Simulated seconds so far.
        """
        return self.ticks * SAMPLE_PERIOD

    @property
    def theta_trace(self) -> np.ndarray:
        """
        Fin angle at every tick.
        """
        return np.concatenate(self.theta) if self.theta else np.empty(0)

    @property
    def force_trace(self) -> np.ndarray:
        """
        Force (n, 2) at every tick.
        """
        return np.concatenate(self.forces) if self.forces else np.empty((0, 2))

    @property
    def command_trace(self) -> np.ndarray:
        """
        The command in force at every tick, (n, 2).
        """
        if not self.actions:
            return np.empty((0, 2))
        return np.repeat(np.array(self.actions), self.tick_counts, axis=0)

    @property
    def total_reward(self) -> float:
        """
        Sum of step rewards.
        """
        return float(np.sum(self.rewards))

    @property
    def mean_reward(self) -> float:
        """
        Mean step reward.
        """
        return float(np.mean(self.rewards)) if self.rewards else 0.0


def dual_rate_rollout(
    controller: Controller,
    env: Environment,
    reference: Tuple[float, float],
    n_control_steps: int,
    reward_params: Optional[RewardParams] = None,
    k: int = DEFAULT_HISTORY,
    mode: str = "sample",
    rng: Optional[np.random.Generator] = None,
    seed: int = 0,
    trajectory: Optional[Trajectory] = None,
) -> Trajectory:
    """
    Run one episode of ``n_control_steps`` decisions from a reset environment.

    :param trajectory: Filled in place when given, so a caller still holds the
        partial episode if the environment faults.
    :raises ConfigurationError: If the environment returns a wrong tick count.
    """
    if n_control_steps < 1:
        raise ConfigurationError(f"n_control_steps must be >= 1, got {n_control_steps}")
    reward_params = reward_params or RewardParams()
    trajectory = trajectory if trajectory is not None else Trajectory(reference)
    trajectory.reference = (float(reference[0]), float(reference[1]))
    window = ForceWindow(reference, reward_params.n)
    history = deque(maxlen=k + 1)
    theta = env.reset(seed)
    state = controller.initial_state()

    for step in range(n_control_steps):
        observation = encode_state(theta, reference, list(history), k)
        if state is not None:
            hidden, cell = state[0]
            trajectory.hidden.append(hidden[0].copy())
            trajectory.cell.append(cell[0].copy())
        sample, state = controller.act(observation, state, mode=mode, rng=rng)
        n_ticks = TICK_PATTERN[step % len(TICK_PATTERN)]
        block = env.advance(sample.command, n_ticks)
        if len(block.theta) != n_ticks or block.forces.shape != (n_ticks, 2):
            raise ConfigurationError(
                f"{env.name} returned {len(block.theta)} ticks, expected {n_ticks}"
            )
        window.extend(block.forces)
        trajectory.observations.append(observation)
        trajectory.pre_squash.append(sample.pre_squash)
        trajectory.actions.append(sample.action)
        trajectory.log_probs.append(sample.log_prob)
        trajectory.values.append(sample.value)
        trajectory.rewards.append(step_reward(window, reward_params))
        trajectory.tick_counts.append(n_ticks)
        trajectory.theta.append(block.theta)
        trajectory.forces.append(block.forces)
        theta = float(block.theta[-1])
        history.appendleft(sample.command.as_tuple())

    if trajectory.ticks != ticks_for(n_control_steps):
        raise ConfigurationError(
            f"{n_control_steps} control steps used {trajectory.ticks} ticks, "
            f"expected {ticks_for(n_control_steps)}"
        )
    final = encode_state(theta, reference, list(history), k)
    trajectory.bootstrap_value = controller.value(final, state)
    logger.debug(
        "%s episode at %s: %d steps, mean reward %.4f",
        env.name,
        reference,
        len(trajectory),
        trajectory.mean_reward,
    )
    return trajectory
