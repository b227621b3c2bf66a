"""
Training the single reference-conditioned policy and the grid of
per-reference policies, all on the surrogate.

Example Usage:

```python
checkpoint = train_single(surrogate, PPOConfig(), seed=0)
bank = train_grid(surrogate, DEFAULT_GRID_POINTS, PPOConfig(), seed=0)
bank.save("out/policies/grid")
policy = grid_select(bank, (1.9, -0.8)).policy
```
"""

import configparser
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from softfin.errors import ConfigurationError, SoftfinError
from softfin.nn import AdamState
from softfin.reward import RewardParams
from softfin.rl.environment import (
    Environment,
    SurrogateEnvironment,
    Trajectory,
    dual_rate_rollout,
)
from softfin.rl.policy import PolicyCheckpoint, PolicyNet
from softfin.rl.ppo import PPOConfig, ppo_update
from softfin.surrogate.model import SurrogateModel

logger = logging.getLogger(__name__)

Reference = Tuple[float, float]
ReferenceSampler = Callable[[np.random.Generator], Reference]

DEFAULT_GRID_POINTS: Tuple[Reference, ...] = (
    (1.0, -1.0),
    (2.0, -1.0),
    (2.0, 0.0),
    (3.0, 0.0),
    (1.0, 1.0),
    (2.0, 1.0),
)
BEST_WINDOW = 10
BANK_MANIFEST = "manifest"


def uniform_references(config: PPOConfig) -> ReferenceSampler:
    """
    Draw references uniformly from the configured training box.
    """

    def sample(rng: np.random.Generator) -> Reference:
        return (
            float(rng.uniform(*config.fx_range)),
            float(rng.uniform(*config.fy_range)),
        )

    return sample


def fixed_reference(reference: Reference) -> ReferenceSampler:
    """
    Always the same reference.
    """
    return lambda rng: (float(reference[0]), float(reference[1]))


def collect_episodes(
    policy: PolicyNet,
    env: Environment,
    references: ReferenceSampler,
    config: PPOConfig,
    reward_params: RewardParams,
    rng: np.random.Generator,
) -> List[Trajectory]:
    """
    Whole episodes until at least ``config.horizon`` control steps are held.
    """
    episodes = []
    steps = 0
    while steps < config.horizon:
        reference = references(rng)
        episode = dual_rate_rollout(
            policy,
            env,
            reference,
            config.episode_steps,
            reward_params,
            k=config.history,
            mode="sample",
            rng=rng,
            seed=int(rng.integers(2**31)),
        )
        episodes.append(episode)
        steps += len(episode)
    return episodes


def train_policy(
    env: Environment,
    references: ReferenceSampler,
    total_steps: int,
    config: PPOConfig,
    reward_params: Optional[RewardParams] = None,
    seed: int = 0,
    reference: Optional[Reference] = None,
) -> PolicyCheckpoint:
    """
    PPO from scratch for ``total_steps`` control steps.

    The returned policy is the parameters that produced the best mean reward
    over the last ten episodes seen at any update.

    :param reference: Recorded in the checkpoint for fixed-reference runs.
    """
    reward_params = reward_params or RewardParams()
    policy = PolicyNet.build(config.history, config.hidden, seed)
    rollout_seq, update_seq = np.random.SeedSequence([seed, 11]).spawn(2)
    rollout_rng = np.random.default_rng(rollout_seq)
    update_rng = np.random.default_rng(update_seq)
    optimizer = AdamState(learning_rate=config.learning_rate)
    episode_rewards: List[float] = []
    best_score = -math.inf
    best = policy.snapshot()
    steps = 0
    update = 0
    while steps < total_steps:
        collected_by = policy.snapshot()
        episodes = collect_episodes(
            policy, env, references, config, reward_params, rollout_rng
        )
        steps += sum(len(e) for e in episodes)
        episode_rewards.extend(e.mean_reward for e in episodes)
        score = float(np.mean(episode_rewards[-BEST_WINDOW:]))
        if score > best_score:
            best_score = score
            best = collected_by
        diagnostics = ppo_update(policy, episodes, config, optimizer, update_rng)
        update += 1
        logger.debug(
            "update %d: steps %d, recent reward %.4f, KL %.4f, clip %.3f",
            update,
            steps,
            score,
            diagnostics.approx_kl,
            diagnostics.clip_fraction,
        )
    policy.load_parameters(best)
    logger.info(
        "Trained policy for %d steps; best recent mean reward %.4f", steps, best_score
    )
    return PolicyCheckpoint(
        policy,
        conditioning="in-state",
        reference=reference,
        seed=seed,
        steps=steps,
        episode_rewards=episode_rewards,
    )


def train_single(
    surrogate: SurrogateModel,
    config: PPOConfig,
    reward_params: Optional[RewardParams] = None,
    seed: int = 0,
) -> PolicyCheckpoint:
    """
    One policy for every reference: a new reference is drawn each episode and
    read from the observation.
    """
    logger.info("Training single policy (%d steps, seed %d)", config.single_steps, seed)
    return train_policy(
        SurrogateEnvironment(surrogate),
        uniform_references(config),
        config.single_steps,
        config,
        reward_params,
        seed,
    )


def grid_point_seed(seed: int, point: Reference) -> int:
    """
    Seed of one grid point, derived from the run seed and the point itself.
    """
    key = [seed, round((point[0] + 100.0) * 1000), round((point[1] + 100.0) * 1000)]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


@dataclass
class GridBank:
    """
    Policies keyed by the reference force they were trained for, plus the
    points whose training failed.
    """

    entries: Dict[Reference, PolicyCheckpoint] = field(default_factory=dict)
    failures: Dict[Reference, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, point: Reference) -> PolicyCheckpoint:
        return self.entries[(float(point[0]), float(point[1]))]

    @property
    def points(self) -> List[Reference]:
        """
        Trained points, sorted.
        """
        return sorted(self.entries)

    def add(self, point: Reference, checkpoint: PolicyCheckpoint) -> None:
        """
        Register a policy for ``point``.

        :raises ConfigurationError: If the point already has one.
        """
        key = (float(point[0]), float(point[1]))
        if key in self.entries:
            raise ConfigurationError(f"grid point {key} already trained")
        self.entries[key] = checkpoint

    def save(self, directory: str) -> Dict[Reference, int]:
        """
        One checkpoint file per point plus a manifest.

        :return: Bytes written per point.
        """
        os.makedirs(directory, exist_ok=True)
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        sizes = {}
        for index, point in enumerate(self.points):
            checkpoint = self.entries[point]
            filename = f"policy_{index:02d}.ckpt"
            sizes[point] = checkpoint.save(os.path.join(directory, filename))
            parser[f"point.{index:02d}"] = {
                "x": repr(point[0]),
                "y": repr(point[1]),
                "file": filename,
                "seed": str(checkpoint.seed),
                "steps": str(checkpoint.steps),
                "bytes": str(sizes[point]),
            }
        parser["failures"] = {
            f"{x!r},{y!r}": " ".join(message.split())
            for (x, y), message in self.failures.items()
        }
        with open(os.path.join(directory, BANK_MANIFEST), "w", encoding="utf-8") as f:
            parser.write(f)
        return sizes

    @classmethod
    def load(cls, directory: str) -> "GridBank":
        """
        Read a bank written by ``save``.

        :raises FileNotFoundError: If the manifest or a checkpoint is missing.
        """
        path = os.path.join(directory, BANK_MANIFEST)
        if not os.path.isfile(path):
            raise FileNotFoundError(f"No grid bank manifest at {path}")
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        parser.read(path, encoding="utf-8")
        bank = cls()
        for section in parser.sections():
            if section.startswith("point."):
                entry = parser[section]
                point = (float(entry["x"]), float(entry["y"]))
                path = os.path.join(directory, entry["file"])
                bank.add(point, PolicyCheckpoint.load(path))
        if parser.has_section("failures"):
            for key, message in parser["failures"].items():
                x, y = (float(v) for v in key.split(","))
                bank.failures[(x, y)] = message
        return bank


def train_grid(
    surrogate: SurrogateModel,
    points: Iterable[Reference] = DEFAULT_GRID_POINTS,
    config: Optional[PPOConfig] = None,
    reward_params: Optional[RewardParams] = None,
    seed: int = 0,
) -> GridBank:
    """
    One policy per reference point, each trained with that reference fixed.
    A point whose training fails is recorded in ``bank.failures`` and the
    others still train.

    :raises ConfigurationError: If no points are given.
    """
    config = config or PPOConfig()
    points = [(float(x), float(y)) for x, y in points]
    if not points:
        raise ConfigurationError("train_grid needs at least one reference point")
    if len(set(points)) != len(points):
        raise ConfigurationError(f"grid points must be distinct, got {points}")
    bank = GridBank()
    for index, point in enumerate(points):
        logger.info("Training grid policy %d/%d at %s", index + 1, len(points), point)
        try:
            checkpoint = train_policy(
                SurrogateEnvironment(surrogate),
                fixed_reference(point),
                config.grid_steps,
                config,
                reward_params,
                grid_point_seed(seed, point),
                reference=point,
            )
        except SoftfinError as e:
            logger.warning("Grid point %s failed: %s", point, e)
            bank.failures[point] = str(e)
            continue
        bank.add(point, checkpoint)
    return bank


def grid_select(bank: GridBank, reference: Reference) -> PolicyCheckpoint:
    """
    The policy of the trained point nearest to ``reference``; ties go to the
    smallest (x, y).

    :raises ConfigurationError: On an empty bank.
    """
    if len(bank) == 0:
        raise ConfigurationError("grid bank is empty")
    x, y = reference
    nearest = min(
        bank.points, key=lambda p: (math.hypot(p[0] - x, p[1] - y), p[0], p[1])
    )
    return bank.entries[nearest]
