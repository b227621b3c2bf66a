"""
Recurrent actor-critic for the motion controller.

A shared trunk lstm(D->H) -> linear(H->H) -> relu feeds an actor head
linear(H->4) (mean and raw log-std per action dimension) and a critic head
linear(H->1). Actions are Gaussian in an unbounded space, squashed by tanh and
mapped affinely into the command bounds, so every action is strictly inside
them.

Example Usage:

```python
policy = PolicyNet.build(k=4, hidden=64, seed=0)
state = policy.initial_state()
sample, state = policy.act(observation, state, mode="mean")
command = sample.command
```
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Protocol, Tuple

import numpy as np

from softfin.datagen import sample_command
from softfin.errors import ConfigurationError, NonFiniteError
from softfin.nn import (
    LSTM,
    Activation,
    Linear,
    Network,
    load_checkpoint,
    save_checkpoint,
)
from softfin.plant import ANGLE_LIMIT, OMEGA_MAX, OMEGA_MIN, MotorCommand
from softfin.rl.state import DEFAULT_HISTORY, observation_scale, state_size
from softfin.surrogate.windows import Normalizer

LOG_STD_MIN = -4.0
LOG_STD_MAX = 1.0
# tanh output is kept this far inside +-1 so actions stay strictly in bounds.
SQUASH_LIMIT = 1.0 - 1e-6
ACTION_CENTER = np.array([0.0, 0.5 * (OMEGA_MIN + OMEGA_MAX)])
ACTION_HALF_RANGE = np.array([ANGLE_LIMIT, 0.5 * (OMEGA_MAX - OMEGA_MIN)])
MODES = ("sample", "mean")
NETWORKS = ("trunk", "actor", "critic")
HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def squash_log_std(raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Map raw head outputs smoothly into [LOG_STD_MIN, LOG_STD_MAX].

    :return: log-std and its derivative w.r.t. ``raw``.
    """
    t = np.tanh(raw)
    span = LOG_STD_MAX - LOG_STD_MIN
    return LOG_STD_MIN + 0.5 * span * (t + 1.0), 0.5 * span * (1.0 - t * t)


def to_action(u: np.ndarray) -> np.ndarray:
    """
    Squash pre-activation samples (..., 2) into command space.
    """
    squashed = np.clip(np.tanh(u), -SQUASH_LIMIT, SQUASH_LIMIT)
    return squashed * ACTION_HALF_RANGE + ACTION_CENTER


def log_tanh_derivative(u: np.ndarray) -> np.ndarray:
    """
    log(1 - tanh(u)^2), computed without cancellation.
    """
    return 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


def log_prob_per_dim(
    u: np.ndarray, mean: np.ndarray, log_std: np.ndarray
) -> np.ndarray:
    """
    Per-dimension log density of the squashed action, including the tanh and
    affine change of variables.
    """
    z = (u - mean) * np.exp(-log_std)
    gaussian = -0.5 * z * z - log_std - HALF_LOG_TWO_PI
    return gaussian - log_tanh_derivative(u) - np.log(ACTION_HALF_RANGE)


def action_log_prob(u: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    """
    Joint log density over the last axis.
    """
    return np.sum(log_prob_per_dim(u, mean, log_std), axis=-1)


def gaussian_entropy(log_std: np.ndarray) -> np.ndarray:
    """
    Entropy of the pre-squash Gaussian, summed over the last axis.
    """
    return np.sum(log_std + 0.5 + HALF_LOG_TWO_PI, axis=-1)


@dataclass
class ActionSample:
    """
    One decision: the command, its pre-squash value, log density and the
    critic's value estimate.
    """

    command: MotorCommand
    action: np.ndarray
    pre_squash: np.ndarray
    log_prob: float
    value: float


class Controller(Protocol):
    """
    Anything the dual-rate loop can ask for actions.
    """

    def initial_state(self) -> Any:
        """
        Recurrent state at the start of an episode.
        """

    def act(
        self,
        observation: np.ndarray,
        state: Any,
        mode: str = "sample",
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[ActionSample, Any]:
        """
        Choose an action and advance the recurrent state.
        """

    def value(self, observation: np.ndarray, state: Any) -> float:
        """
        Critic estimate for ``observation``.
        """


@dataclass
class SequenceOutputs:
    """
    Train-mode pass over (B, L) observation sequences, with the tapes needed
    to backpropagate head gradients.
    """

    mean: np.ndarray
    raw_log_std: np.ndarray
    log_std: np.ndarray
    log_std_slope: np.ndarray
    values: np.ndarray
    tapes: Dict[str, Any]


class PolicyNet:
    """
    Trunk, actor and critic networks plus the fixed observation scaling.

    :param k: Action history depth of the observations.
    """

    def __init__(self, trunk: Network, actor: Network, critic: Network, k: int):
        self.trunk = trunk
        self.actor = actor
        self.critic = critic
        self.k = k
        mean, std = observation_scale(k)
        self.observation_normalizer = Normalizer(mean, std)

    @classmethod
    def build(cls, k: int = DEFAULT_HISTORY, hidden: int = 64, seed: int = 0):
        """
        Freshly initialized policy for history depth ``k``.
        """
        seeds = np.random.SeedSequence(seed).generate_state(3)
        trunk_seed, actor_seed, critic_seed = (int(s) for s in seeds)
        trunk = Network.build(
            [
                LSTM(state_size(k), hidden, return_sequences=True),
                Linear(hidden, hidden),
                Activation("relu"),
            ],
            seed=trunk_seed,
            name="trunk",
        )
        actor = Network.build([Linear(hidden, 4)], seed=actor_seed, name="actor")
        critic = Network.build([Linear(hidden, 1)], seed=critic_seed, name="critic")
        return cls(trunk, actor, critic, k)

    @property
    def networks(self) -> Dict[str, Network]:
        """
        The three networks by name.
        """
        return {"trunk": self.trunk, "actor": self.actor, "critic": self.critic}

    @property
    def hidden(self) -> int:
        """
        Trunk width.
        """
        return self.trunk.recurrent_layers[0].hidden

    def parameters(self) -> Dict[str, np.ndarray]:
        """
        Live parameter arrays of all networks, keyed ``<network>/<name>``.
        """
        return {
            f"{net_name}/{name}": value
            for net_name, network in self.networks.items()
            for name, value in network.parameters().items()
        }

    @property
    def parameter_count(self) -> int:
        """
        Total scalar parameters.
        """
        return sum(network.parameter_count for network in self.networks.values())

    def load_parameters(self, values: Dict[str, np.ndarray]) -> None:
        """
        Overwrite all parameters from a ``parameters()``-keyed mapping.
        """
        for net_name, network in self.networks.items():
            prefix = f"{net_name}/"
            network.load_parameters(
                {k[len(prefix) :]: v for k, v in values.items() if k.startswith(prefix)}
            )

    def snapshot(self) -> Dict[str, np.ndarray]:
        """
        Independent copy of all parameters.
        """
        return {name: value.copy() for name, value in self.parameters().items()}

    def copy(self) -> "PolicyNet":
        """
        Deep copy.
        """
        return PolicyNet(
            self.trunk.copy(), self.actor.copy(), self.critic.copy(), self.k
        )

    def initial_state(self, batch: int = 1) -> List[Tuple[np.ndarray, np.ndarray]]:
        """
        Zero LSTM state.
        """
        return self.trunk.initial_state(batch)

    def _features(self, observation: np.ndarray, state) -> Tuple[np.ndarray, Any]:
        x = self.observation_normalizer.normalize(observation)[None, None, :]
        features, new_state, _ = self.trunk.forward(x, mode="eval", state=state)
        return features, new_state

    def act(
        self,
        observation: np.ndarray,
        state,
        mode: str = "sample",
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[ActionSample, Any]:
        """
        Choose an action for one observation.

        :param mode: "sample" draws from the policy, "mean" is deterministic.
        :raises NonFiniteError: If a network output is not finite.
        """
        if mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
        if mode == "sample" and rng is None:
            raise ConfigurationError("sampling actions needs an RNG")
        features, new_state = self._features(observation, state)
        head = self.actor.forward(features, mode="eval")[0][0, 0]
        value = float(self.critic.forward(features, mode="eval")[0][0, 0, 0])
        if not (np.all(np.isfinite(head)) and math.isfinite(value)):
            raise NonFiniteError("policy produced a non-finite output", layer="actor")
        mean = head[:2]
        log_std, _ = squash_log_std(head[2:])
        if mode == "mean":
            u = mean.copy()
        else:
            u = mean + np.exp(log_std) * rng.standard_normal(2)
        action = to_action(u)
        sample = ActionSample(
            MotorCommand(float(action[0]), float(action[1])),
            action,
            u,
            float(action_log_prob(u, mean, log_std)),
            value,
        )
        return sample, new_state

    def value(self, observation: np.ndarray, state) -> float:
        """
        Critic estimate without advancing the caller's state.
        """
        features, _ = self._features(observation, state)
        return float(self.critic.forward(features, mode="eval")[0][0, 0, 0])

    def forward_sequences(
        self, observations: np.ndarray, state: List[Tuple[np.ndarray, np.ndarray]]
    ) -> SequenceOutputs:
        """
        Train-mode pass over (B, L, D) raw observations from the given
        per-sequence initial states.
        """
        x = self.observation_normalizer.normalize(observations)
        features, _, trunk_tape = self.trunk.forward(x, mode="train", state=state)
        head, _, actor_tape = self.actor.forward(features, mode="train")
        values, _, critic_tape = self.critic.forward(features, mode="train")
        log_std, slope = squash_log_std(head[..., 2:])
        return SequenceOutputs(
            head[..., :2],
            head[..., 2:],
            log_std,
            slope,
            values[..., 0],
            {"trunk": trunk_tape, "actor": actor_tape, "critic": critic_tape},
        )

    def backward_sequences(
        self, outputs: SequenceOutputs, head_grad: np.ndarray, value_grad: np.ndarray
    ) -> Dict[str, np.ndarray]:
        """
        Parameter gradients, keyed like ``parameters()``, from gradients on the
        actor head output (B, L, 4) and on the values (B, L).
        """
        actor_grads = self.actor.backward(outputs.tapes["actor"], head_grad)
        critic_grads = self.critic.backward(
            outputs.tapes["critic"], value_grad[..., None]
        )
        trunk_grads = self.trunk.backward(
            outputs.tapes["trunk"], actor_grads.input + critic_grads.input
        )
        grads = {}
        for net_name, result in (
            ("trunk", trunk_grads),
            ("actor", actor_grads),
            ("critic", critic_grads),
        ):
            for name, grad in result.params.items():
                grads[f"{net_name}/{name}"] = grad
        return grads


class RandomActor:
    """
    Baseline controller: uniformly random commands, no memory.
    """

    def initial_state(self) -> None:
        return None

    def act(self, observation, state, mode="sample", rng=None):
        del observation, mode
        if rng is None:
            raise ConfigurationError("RandomActor needs an RNG")
        command = sample_command(rng)
        action = np.array(command.as_tuple())
        return ActionSample(command, action, np.zeros(2), 0.0, 0.0), state

    def value(self, observation, state) -> float:
        del observation, state
        return 0.0


@dataclass
class PolicyCheckpoint:
    """
    A trained policy with how it was trained.

    conditioning: how the reference reaches the policy; always "in-state"
    reference: the fixed training reference of a grid policy, None otherwise
    """

    policy: PolicyNet
    conditioning: str = "in-state"
    reference: Optional[Tuple[float, float]] = None
    seed: int = 0
    steps: int = 0
    episode_rewards: List[float] = field(default_factory=list)

    def save(self, path: str) -> int:
        """
        Write the three networks and training metadata.

        :return: Bytes written.
        """
        reference = "none"
        if self.reference is not None:
            reference = ",".join(map(repr, self.reference))
        metadata = {
            "kind": "policy",
            "k": str(self.policy.k),
            "conditioning": self.conditioning,
            "reference": reference,
            "seed": str(self.seed),
            "steps": str(self.steps),
            "episode_rewards": ",".join(repr(float(r)) for r in self.episode_rewards),
        }
        return save_checkpoint(path, self.policy.networks, metadata)

    @classmethod
    def load(cls, path: str) -> "PolicyCheckpoint":
        """
        Read a checkpoint written by ``save``.

        :raises FileNotFoundError: If ``path`` does not exist.
        :raises ConfigurationError: If it is not a policy checkpoint.
        """
        networks, metadata = load_checkpoint(path)
        if metadata.get("kind") != "policy" or set(networks) != set(NETWORKS):
            raise ConfigurationError(f"{path} is not a policy checkpoint")
        try:
            reference = None
            if metadata["reference"] != "none":
                x, y = (float(v) for v in metadata["reference"].split(","))
                reference = (x, y)
            rewards = metadata.get("episode_rewards", "")
            return cls(
                PolicyNet(*(networks[name] for name in NETWORKS), int(metadata["k"])),
                metadata["conditioning"],
                reference,
                int(metadata["seed"]),
                int(metadata["steps"]),
                [float(r) for r in rewards.split(",")] if rewards else [],
            )
        except (KeyError, ValueError) as e:
            raise ConfigurationError(f"{path}: incomplete policy metadata ({e})") from e
