"""
Clipped-objective PPO for the recurrent policy.

Episodes are cut into fixed-length sequences that never cross an episode
boundary; each sequence restarts the LSTM from the state recorded at its
first step during collection. Gradients of the objective are analytic and
flow back through the trunk by backpropagation through time.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from softfin.errors import ConfigurationError
from softfin.nn import AdamState, adam_step, clip_grad_norm
from softfin.rl.environment import Trajectory
from softfin.rl.policy import PolicyNet, action_log_prob, gaussian_entropy

logger = logging.getLogger(__name__)

ADVANTAGE_EPSILON = 1e-8


@dataclass
class PPOConfig:
    """
    PPO hyperparameters, episode layout and training budgets.

    single_steps/grid_steps: control steps for the single policy and for each
    grid point
    fx_range/fy_range: references drawn for the single policy
    """

    gamma: float = 0.99
    lam: float = 0.95
    clip: float = 0.2
    epochs: int = 4
    horizon: int = 256
    minibatch: int = 64
    sequence_length: int = 16
    entropy_coef: float = 0.005
    value_coef: float = 0.5
    learning_rate: float = 3e-4
    max_grad_norm: float = 0.5
    target_kl: float = 0.5
    single_steps: int = 30000
    grid_steps: int = 10000
    episode_steps: int = 90
    history: int = 4
    hidden: int = 64
    fx_range: Tuple[float, float] = (0.0, 3.0)
    fy_range: Tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if not 0.0 < self.clip < 1.0:
            raise ConfigurationError(f"clip must be in (0, 1), got {self.clip}")
        for name in ("gamma", "lam"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConfigurationError(f"{name} must be in (0, 1], got {value}")
        for name in (
            "epochs",
            "horizon",
            "minibatch",
            "sequence_length",
            "episode_steps",
            "hidden",
        ):
            value = getattr(self, name)
            if value < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {value}")
        if self.history < 0:
            raise ConfigurationError(f"history must be >= 0, got {self.history}")
        for name in ("fx_range", "fy_range"):
            low, high = getattr(self, name)
            if low > high:
                raise ConfigurationError(f"{name} is empty: {low} > {high}")

    @property
    def sequences_per_minibatch(self) -> int:
        """
        Sequences that make up one minibatch of ``minibatch`` steps.
        """
        return max(1, self.minibatch // self.sequence_length)


@dataclass
class UpdateDiagnostics:
    """
    Means over the minibatches of the last epoch that ran.
    """

    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float
    epochs_run: int
    early_stopped: bool


def gae_advantages(
    rewards: Sequence[float],
    values: Sequence[float],
    bootstrap: float,
    gamma: float,
    lam: float,
    dones: Optional[Sequence[bool]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Generalized advantage estimates and the matching returns.

    :param bootstrap: Value of the state after the last step.
    :param dones: True where the episode terminated after that step; the
        following value is then not bootstrapped.
    :return: (advantages, advantages + values), not normalized.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.shape != values.shape:
        raise ValueError(f"rewards {rewards.shape} and values {values.shape} differ")
    if dones is None:
        dones = np.zeros(len(rewards))
    dones = np.asarray(dones, dtype=np.float64)
    advantages = np.zeros_like(rewards)
    running = 0.0
    for t in reversed(range(len(rewards))):
        next_value = bootstrap if t == len(rewards) - 1 else values[t + 1]
        live = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * live - values[t]
        running = delta + gamma * lam * live * running
        advantages[t] = running
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    """
    Zero mean, unit spread.
    """
    return (advantages - advantages.mean()) / (advantages.std() + ADVANTAGE_EPSILON)


@dataclass
class SequenceBatch:
    """
    Padded (B, L) sequences with a mask, and each sequence's initial LSTM state.
    """

    observations: np.ndarray
    pre_squash: np.ndarray
    old_log_probs: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray
    mask: np.ndarray
    hidden: np.ndarray
    cell: np.ndarray

    def __len__(self) -> int:
        return self.observations.shape[0]

    def select(self, indices: np.ndarray) -> "SequenceBatch":
        """
        Subset of sequences.
        """
        return SequenceBatch(
            *(getattr(self, name)[indices] for name in self.__dataclass_fields__)
        )


def build_sequences(
    trajectories: Sequence[Trajectory],
    advantages: Sequence[np.ndarray],
    returns: Sequence[np.ndarray],
    length: int,
) -> SequenceBatch:
    """
    Cut every trajectory into sequences of ``length`` steps, padding the last
    one of each episode.

    :raises ConfigurationError: If a trajectory has no recorded LSTM state.
    """
    chunks = []
    for trajectory, advantage, ret in zip(trajectories, advantages, returns):
        if len(trajectory.hidden) != len(trajectory):
            raise ConfigurationError(
                "trajectory holds no recurrent state to train from"
            )
        for start in range(0, len(trajectory), length):
            stop = min(start + length, len(trajectory))
            chunks.append((trajectory, advantage, ret, start, stop))

    first = trajectories[0]
    width = first.observations[0].shape[0]
    hidden = first.hidden[0].shape[0]
    count = len(chunks)
    batch = SequenceBatch(
        np.zeros((count, length, width)),
        np.zeros((count, length, 2)),
        np.zeros((count, length)),
        np.zeros((count, length)),
        np.zeros((count, length)),
        np.zeros((count, length)),
        np.zeros((count, hidden)),
        np.zeros((count, hidden)),
    )
    for row, (trajectory, advantage, ret, start, stop) in enumerate(chunks):
        n = stop - start
        batch.observations[row, :n] = trajectory.observations[start:stop]
        batch.pre_squash[row, :n] = trajectory.pre_squash[start:stop]
        batch.old_log_probs[row, :n] = trajectory.log_probs[start:stop]
        batch.advantages[row, :n] = advantage[start:stop]
        batch.returns[row, :n] = ret[start:stop]
        batch.mask[row, :n] = 1.0
        batch.hidden[row] = trajectory.hidden[start]
        batch.cell[row] = trajectory.cell[start]
    return batch


def ppo_objective(policy: PolicyNet, batch: SequenceBatch, config: PPOConfig):
    """
    Loss to minimize and its parameter gradients:

        -mean(min(rho A, clip(rho) A)) + c_v mean((V - R)^2) - c_e mean(H)

    :return: (loss, gradients keyed like ``policy.parameters()``, stats dict)
    """
    out = policy.forward_sequences(batch.observations, [(batch.hidden, batch.cell)])
    mask = batch.mask
    count = max(float(mask.sum()), 1.0)
    u = batch.pre_squash
    inverse_var = np.exp(-2.0 * out.log_std)
    log_prob = action_log_prob(u, out.mean, out.log_std)
    log_ratio = (log_prob - batch.old_log_probs) * mask
    ratio = np.exp(log_ratio)
    advantages = batch.advantages
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - config.clip, 1.0 + config.clip) * advantages
    policy_loss = -float(np.sum(np.minimum(unclipped, clipped) * mask)) / count
    value_error = out.values - batch.returns
    value_loss = float(np.sum(value_error * value_error * mask)) / count
    entropy = float(np.sum(gaussian_entropy(out.log_std) * mask)) / count
    loss = policy_loss + config.value_coef * value_loss - config.entropy_coef * entropy

    # Only the unclipped branch carries gradient through the ratio.
    d_log_prob = -(unclipped * (unclipped <= clipped)) * mask / count
    deviation = u - out.mean
    d_mean = d_log_prob[..., None] * deviation * inverse_var
    d_log_std = d_log_prob[..., None] * (deviation * deviation * inverse_var - 1.0)
    d_log_std -= config.entropy_coef * mask[..., None] / count
    head_grad = np.concatenate([d_mean, d_log_std * out.log_std_slope], axis=-1)
    value_grad = config.value_coef * 2.0 * value_error * mask / count
    grads = policy.backward_sequences(out, head_grad, value_grad)

    stats = {
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": entropy,
        "approx_kl": float(np.sum(((ratio - 1.0) - log_ratio) * mask)) / count,
        "clip_fraction": float(np.sum((np.abs(ratio - 1.0) > config.clip) * mask))
        / count,
    }
    return loss, grads, stats


def prepare_batch(
    trajectories: Sequence[Trajectory], config: PPOConfig
) -> SequenceBatch:
    """
    GAE per episode, advantages normalized over the whole batch, then cut
    into sequences.
    """
    if len(trajectories) == 0:
        raise ConfigurationError("ppo_update needs at least one trajectory")
    per_episode = [
        gae_advantages(t.rewards, t.values, t.bootstrap_value, config.gamma, config.lam)
        for t in trajectories
    ]
    lengths = [len(t) for t in trajectories]
    flat = normalize_advantages(np.concatenate([adv for adv, _ in per_episode]))
    advantages = np.split(flat, np.cumsum(lengths)[:-1])
    returns = [ret for _, ret in per_episode]
    return build_sequences(trajectories, advantages, returns, config.sequence_length)


def ppo_update(
    policy: PolicyNet,
    trajectories: List[Trajectory],
    config: PPOConfig,
    optimizer: AdamState,
    rng: np.random.Generator,
) -> UpdateDiagnostics:
    """
    Several epochs of minibatch updates on freshly collected episodes.
    Stops early, with a warning, once an epoch's mean KL exceeds
    ``config.target_kl``.

    :raises NonFiniteError: On a non-finite gradient.
    """
    batch = prepare_batch(trajectories, config)
    per_minibatch = config.sequences_per_minibatch
    early_stopped = False
    epochs_run = 0
    epoch_stats: List[dict] = []
    for epoch in range(config.epochs):
        epoch_stats = []
        order = rng.permutation(len(batch))
        for start in range(0, len(order), per_minibatch):
            minibatch = batch.select(order[start : start + per_minibatch])
            _, grads, stats = ppo_objective(policy, minibatch, config)
            grads, norm = clip_grad_norm(grads, config.max_grad_norm)
            updated = adam_step(policy.parameters(), grads, optimizer)
            policy.load_parameters(updated)
            stats["grad_norm"] = norm
            epoch_stats.append(stats)
        epochs_run = epoch + 1
        kl = float(np.mean([s["approx_kl"] for s in epoch_stats]))
        logger.debug("PPO epoch %d: approx KL %.5f", epoch, kl)
        if kl > config.target_kl:
            logger.warning(
                "Stopping PPO epochs early: approx KL %.4f > %.4f after epoch %d",
                kl,
                config.target_kl,
                epoch,
            )
            early_stopped = True
            break

    def mean_of(key: str) -> float:
        return float(np.mean([s[key] for s in epoch_stats]))

    return UpdateDiagnostics(
        mean_of("policy_loss"),
        mean_of("value_loss"),
        mean_of("entropy"),
        mean_of("approx_kl"),
        mean_of("clip_fraction"),
        epochs_run,
        early_stopped,
    )
