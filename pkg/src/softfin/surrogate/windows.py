"""
Windowed training examples for the two surrogate stages and the per-channel
normalization they share.

For a log row k and window length W:

    PosNet    input  cmd_angle[k-W+1..k], cmd_omega[k-W+1..k], theta[k-W..k-1]
              target theta[k]
    ForceNet  input  theta[k-W+1..k], omega[k-W+1..k] with
                     omega[i] = (theta[i] - theta[i-1]) / 0.01
              target (fx[k], fy[k])
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from softfin.datagen import DataLog
from softfin.errors import ConfigurationError, NonFiniteError
from softfin.plant import OMEGA_MAX, OMEGA_MIN, SAMPLE_PERIOD

DEFAULT_WINDOW = 100
# Smallest spread kept by a normalizer; flatter channels are left unscaled.
MIN_STD = 1e-8


@dataclass
class Normalizer:
    """
    Per-channel affine normalization, channels on the last axis.
    """

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        self.std = np.atleast_1d(np.asarray(self.std, dtype=np.float64))
        if self.mean.shape != self.std.shape:
            raise ConfigurationError("Normalizer mean and std differ in shape")
        if not (np.all(np.isfinite(self.mean)) and np.all(np.isfinite(self.std))):
            raise ConfigurationError("Normalizer constants must be finite")
        if np.any(self.std <= 0.0):
            raise ConfigurationError("Normalizer std must be > 0")

    @classmethod
    def fit(cls, values: np.ndarray) -> "Normalizer":
        """
        Mean and std over every axis but the last.
        """
        values = np.asarray(values, dtype=np.float64)
        if values.ndim > 1:
            flat = values.reshape(-1, values.shape[-1])
        else:
            flat = values[:, None]
        std = flat.std(axis=0)
        std = np.where(std < MIN_STD, 1.0, std)
        return cls(flat.mean(axis=0), std)

    @property
    def channels(self) -> int:
        """
        Number of channels.
        """
        return self.mean.shape[0]

    def normalize(self, values: np.ndarray) -> np.ndarray:
        """
        (values - mean) / std.

        :raises NonFiniteError: If ``values`` holds NaN or inf.
        """
        values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("Cannot normalize non-finite input")
        return (values - self.mean) / self.std

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        """
        values * std + mean.
        """
        return np.asarray(values, dtype=np.float64) * self.std + self.mean

    def as_text(self) -> Tuple[str, str]:
        """
        Exact comma separated mean and std, for checkpoint metadata.
        """
        return (
            ",".join(repr(float(v)) for v in self.mean),
            ",".join(repr(float(v)) for v in self.std),
        )

    @classmethod
    def from_text(cls, mean: str, std: str) -> "Normalizer":
        """
        Inverse of ``as_text``.
        """
        return cls(
            [float(v) for v in mean.split(",")], [float(v) for v in std.split(",")]
        )


def backward_difference(theta: np.ndarray) -> np.ndarray:
    """
    omega[i] = (theta[i] - theta[i-1]) / dt, with omega[0] = 0.
    """
    theta = np.asarray(theta, dtype=np.float64)
    omega = np.zeros_like(theta)
    omega[1:] = np.diff(theta) / SAMPLE_PERIOD
    return omega


def _targets(log: DataLog, window: int, stride: int) -> np.ndarray:
    if window < 1:
        raise ConfigurationError(f"window must be >= 1, got {window}")
    return np.arange(window, len(log), stride)


def posnet_examples(
    log: DataLog, window: int = DEFAULT_WINDOW, stride: int = 1
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Raw PosNet inputs (N, 3, W), previous angles (N,) and target angles (N,).
    """
    ks = _targets(log, window, stride)
    if len(ks) == 0:
        return np.empty((0, 3, window)), np.empty(0), np.empty(0)
    angle = sliding_window_view(log.cmd_angle, window)[ks - window + 1]
    omega = sliding_window_view(log.cmd_omega, window)[ks - window + 1]
    theta = sliding_window_view(log.theta, window)[ks - window]
    inputs = np.stack([angle, omega, theta], axis=1)
    return inputs, log.theta[ks - 1], log.theta[ks]


def forcenet_examples(
    log: DataLog, window: int = DEFAULT_WINDOW, stride: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Raw ForceNet inputs (N, W, 2) and target forces (N, 2).
    """
    ks = _targets(log, window, stride)
    if len(ks) == 0:
        return np.empty((0, window, 2)), np.empty((0, 2))
    omega = backward_difference(log.theta)
    theta_w = sliding_window_view(log.theta, window)[ks - window + 1]
    omega_w = sliding_window_view(omega, window)[ks - window + 1]
    return np.stack([theta_w, omega_w], axis=2), log.forces[ks]


def forcenet_inputs_from_theta(theta: np.ndarray, window: int) -> np.ndarray:
    """
    ForceNet inputs for every window end in a theta series of W + n samples;
    returns (n, W, 2).
    """
    theta = np.asarray(theta, dtype=np.float64)
    omega = backward_difference(theta)
    theta_w = sliding_window_view(theta[1:], window)
    omega_w = sliding_window_view(omega[1:], window)
    return np.stack([theta_w, omega_w], axis=2)


def rest_examples(
    angles: np.ndarray, window: int, count: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Windows of a fin held still at angles drawn from ``angles``: the commanded
    angle equals the held angle, so the next angle is unchanged and the force
    is zero.

    :return: PosNet inputs, previous and target angles, ForceNet inputs and
        force targets, ``count`` of each.
    """
    held = rng.choice(np.asarray(angles, dtype=np.float64), size=count)
    speeds = rng.uniform(OMEGA_MIN, OMEGA_MAX, size=count)
    ones = np.ones((count, window))
    pos_inputs = np.stack(
        [held[:, None] * ones, speeds[:, None] * ones, held[:, None] * ones], axis=1
    )
    force_inputs = np.stack([held[:, None] * ones, np.zeros((count, window))], axis=2)
    return pos_inputs, held, held, force_inputs, np.zeros((count, 2))


def concat_examples(parts: Sequence[Tuple[np.ndarray, ...]]) -> List[np.ndarray]:
    """
    Concatenate per-log example tuples field by field.
    """
    return [np.concatenate(field, axis=0) for field in zip(*parts)]
