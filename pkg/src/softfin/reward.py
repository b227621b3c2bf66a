"""
Force-tracking reward with a discrete first-order Sobolev smoothness term.

For each axis d the reward charges the distance of the window mean from the
reference plus a weighted root sum of squared first differences:

    r = -sum_d w_d * (|mean(F_d) - ref_d| + lambda_d * sqrt(sum_i dF_d[i]^2))

where dF_d[i] = F_d[i+1] - F_d[i].

Example Usage:

```python
window = ForceWindow(reference=(2.0, 0.0), size=200)
window.extend(forces)  # (k, 2) array of (fx, fy)
r = step_reward(window, RewardParams())
```
"""

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from softfin.errors import ConfigurationError

AXES = ("x", "y")


@dataclass(frozen=True)
class RewardParams:
    """
    Axis weights, smoothness weights and the evaluation window length.
    """

    w_x: float = 1.0
    w_y: float = 1.0
    lambda_x: float = 0.05
    lambda_y: float = 0.05
    n: int = 200

    def __post_init__(self):
        for name in ("w_x", "w_y", "lambda_x", "lambda_y"):
            if not getattr(self, name) >= 0.0:
                raise ConfigurationError(f"RewardParams.{name} must be >= 0")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(
                f"RewardParams.n must be an integer >= 2, got {self.n}"
            )

    def weights(self, axis: str) -> Tuple[float, float]:
        """
        (w_d, lambda_d) for ``axis`` "x" or "y".
        """
        return getattr(self, f"w_{axis}"), getattr(self, f"lambda_{axis}")


class ForceWindow:
    """
    The trailing ``size`` force samples per axis and the reference force.
    Holds fewer samples until warmed up.
    """

    def __init__(self, reference: Tuple[float, float], size: int = 200):
        if size < 2:
            raise ConfigurationError(f"window size must be >= 2, got {size}")
        self.reference = (float(reference[0]), float(reference[1]))
        self.size = int(size)
        self._x = deque(maxlen=self.size)
        self._y = deque(maxlen=self.size)

    def __len__(self) -> int:
        return len(self._x)

    @property
    def warmed_up(self) -> bool:
        """
        True once ``size`` samples are held.
        """
        return len(self._x) == self.size

    def push(self, fx: float, fy: float) -> None:
        """
        Append one sample, dropping the oldest when full.
        """
        self._x.append(float(fx))
        self._y.append(float(fy))

    def extend(self, forces: np.ndarray) -> None:
        """
        Append a (k, 2) block of samples in time order.
        """
        for fx, fy in np.asarray(forces, dtype=np.float64).reshape(-1, 2):
            self.push(fx, fy)

    def axis(self, axis: str) -> np.ndarray:
        """
        Samples of one axis, oldest first.
        """
        return np.fromiter(self._x if axis == "x" else self._y, dtype=np.float64)

    def axis_reference(self, axis: str) -> float:
        """
        Reference force on ``axis``.
        """
        return self.reference[AXES.index(axis)]


def sobolev_smoothness(forces: Sequence[float]) -> float:
    """
    Root sum of squared first differences.

    :raises ValueError: With fewer than two samples.
    """
    values = np.asarray(forces, dtype=np.float64)
    if values.size < 2:
        raise ValueError("sobolev_smoothness needs at least two samples")
    return float(np.sqrt(np.sum(np.diff(values) ** 2)))


def window_error(forces: Sequence[float], reference: float) -> float:
    """
    Signed difference between the window mean and the reference.

    :raises ValueError: On an empty window.
    """
    values = np.asarray(forces, dtype=np.float64)
    if values.size == 0:
        raise ValueError("window_error needs at least one sample")
    return float(np.mean(values) - reference)


def discrete_sobolev_norm(forces: Sequence[float], reference: float) -> float:
    """
    Full discrete first-order Sobolev norm of the tracking error: pointwise
    distance to the reference plus first differences.
    """
    values = np.asarray(forces, dtype=np.float64)
    value_term = float(np.sum((values - reference) ** 2))
    return float(np.sqrt(value_term + sobolev_smoothness(values) ** 2))


def axis_penalty(
    forces: np.ndarray, reference: float, weight: float, smooth: float
) -> float:
    """
    w_d * (|F_e| + lambda_d * smoothness) for one axis.
    """
    error = abs(window_error(forces, reference))
    return weight * (error + smooth * sobolev_smoothness(forces))


def step_reward(window: ForceWindow, params: RewardParams) -> float:
    """
    Reward of the current window; uses the available prefix before warm-up.

    :raises ValueError: With fewer than two samples in the window.
    """
    total = 0.0
    for axis in AXES:
        weight, smooth = params.weights(axis)
        forces = window.axis(axis)
        total += axis_penalty(forces, window.axis_reference(axis), weight, smooth)
    return -total


def calibrate_smoothness_weight(
    windows: Iterable[Tuple[np.ndarray, Tuple[float, float]]]
) -> Tuple[float, float]:
    """
    Smoothness weights that give both reward terms the same mean magnitude:
    lambda_d = mean |F_e^d| / mean smoothness^d over the given windows.

    :param windows: Pairs of a (n, 2) force window and its reference.
    :raises ValueError: If no windows are given or a window never changes.
    """
    errors = {axis: [] for axis in AXES}
    ripples = {axis: [] for axis in AXES}
    for forces, reference in windows:
        forces = np.asarray(forces, dtype=np.float64).reshape(-1, 2)
        for index, axis in enumerate(AXES):
            errors[axis].append(abs(window_error(forces[:, index], reference[index])))
            ripples[axis].append(sobolev_smoothness(forces[:, index]))
    if not errors["x"]:
        raise ValueError("calibrate_smoothness_weight needs at least one window")
    weights = []
    for axis in AXES:
        ripple = float(np.mean(ripples[axis]))
        if ripple == 0.0:
            raise ValueError(f"Forces on axis {axis} never change; cannot calibrate")
        weights.append(float(np.mean(errors[axis])) / ripple)
    return weights[0], weights[1]
