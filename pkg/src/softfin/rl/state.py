"""
Observation layout of the motion controller:

    [theta, F_ref_x, F_ref_y, a_t, a_(t-1), ..., a_(t-k)]

where each a is an executed (target angle, target angular velocity) pair,
most recent first. Missing history is padded with the neutral action (0, 1).
"""

from typing import Sequence, Tuple

import numpy as np

from softfin.plant import ANGLE_LIMIT, OMEGA_MAX, OMEGA_MIN

Action = Tuple[float, float]
NEUTRAL_ACTION: Action = (0.0, OMEGA_MIN)
DEFAULT_HISTORY = 4


def state_size(k: int) -> int:
    """
    Observation length for a history depth of ``k``: 3 + 2(k + 1).
    """
    return 3 + 2 * (k + 1)


def encode_state(
    theta: float,
    reference: Tuple[float, float],
    history: Sequence[Action],
    k: int = DEFAULT_HISTORY,
) -> np.ndarray:
    """
    Build the observation vector.

    :param history: Executed actions, most recent first; only the first
        k + 1 are used.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    actions = list(history[: k + 1])
    actions += [NEUTRAL_ACTION] * (k + 1 - len(actions))
    vector = np.empty(state_size(k), dtype=np.float64)
    vector[:3] = (theta, reference[0], reference[1])
    vector[3:] = np.asarray(actions, dtype=np.float64).reshape(-1)
    return vector


def observation_scale(k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fixed per-entry (mean, std) mapping observations to roughly unit range.
    """
    omega_mid = 0.5 * (OMEGA_MIN + OMEGA_MAX)
    omega_half = 0.5 * (OMEGA_MAX - OMEGA_MIN)
    mean = [0.0, 1.5, 0.0] + [0.0, omega_mid] * (k + 1)
    std = [ANGLE_LIMIT, 1.5, 1.0] + [ANGLE_LIMIT, omega_half] * (k + 1)
    return np.array(mean), np.array(std)
