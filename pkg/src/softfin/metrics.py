"""
Time series metrics: RMSE, MAE, path-normalized DTW and a trailing moving
average.

A series is a 1-D array of samples or a (n, channels) array; DTW compares
multi-channel samples by Euclidean distance.

Example Usage:

```python
rmse([0.0, 0.0], [3.0, 4.0])       # 3.5355...
dtw([0, 1, 2], [0, 1, 2, 2])        # 0.0
moving_average([0, 2, 4], window=2) # [0., 1., 3.]
```
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from softfin.errors import InfeasibleBandError

Series = Union[Sequence[float], np.ndarray]


def as_series(values: Series, name: str = "series") -> np.ndarray:
    """
    Float64 array view of ``values``.

    :raises ValueError: If the series is empty, has more than two axes or holds
        non-finite values.
    """
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 0 or array.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if array.ndim > 2:
        raise ValueError(f"{name} must be 1-D or (n, channels), got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} holds non-finite values")
    return array


def _paired(a: Series, b: Series) -> Tuple[np.ndarray, np.ndarray]:
    a, b = as_series(a, "a"), as_series(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"Series shapes differ: {a.shape} vs {b.shape}")
    return a, b


def rmse(a: Series, b: Series) -> float:
    """
    Root mean squared difference.

    :raises ValueError: On a length mismatch.
    """
    a, b = _paired(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def mae(a: Series, b: Series) -> float:
    """
    Mean absolute difference.

    :raises ValueError: On a length mismatch.
    """
    a, b = _paired(a, b)
    return float(np.mean(np.abs(a - b)))


def _local_cost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim == 1:
        return np.abs(a[:, None] - b[None, :])
    return np.sqrt(np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=2))


def dtw(a: Series, b: Series, band: Optional[int] = None) -> float:
    """
    Dynamic time warping distance divided by the optimal path length.

    Paths run from (0, 0) to (n-1, m-1) with unit steps; among paths of minimal
    total cost the shortest is taken. With ``band``, cells with |i - j| > band
    are excluded (Sakoe-Chiba).

    :raises InfeasibleBandError: If ``band`` < |len(a) - len(b)|.
    :raises ValueError: On empty input or mismatched channel counts.
    """
    a, b = as_series(a, "a"), as_series(b, "b")
    if a.ndim != b.ndim or a.shape[1:] != b.shape[1:]:
        raise ValueError(f"Series channels differ: {a.shape} vs {b.shape}")
    n, m = len(a), len(b)
    if band is not None:
        if band < 0:
            raise ValueError(f"band must be >= 0, got {band}")
        if band < abs(n - m):
            raise InfeasibleBandError(
                f"band {band} cannot connect series of lengths {n} and {m}"
            )
    radius = max(n, m) if band is None else band
    cost = _local_cost(a, b)

    inf = np.inf
    acc = np.full((n, m), inf)
    steps = np.zeros((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(max(0, i - radius), min(m, i + radius + 1)):
            if i == 0 and j == 0:
                acc[0, 0], steps[0, 0] = cost[0, 0], 1
                continue
            best = (inf, 0)
            for pi, pj in ((i - 1, j - 1), (i - 1, j), (i, j - 1)):
                if pi < 0 or pj < 0:
                    continue
                candidate = (acc[pi, pj], steps[pi, pj])
                if candidate[0] < inf and candidate < best:
                    best = candidate
            acc[i, j] = best[0] + cost[i, j]
            steps[i, j] = best[1] + 1
    return float(acc[n - 1, m - 1] / steps[n - 1, m - 1])


def moving_average(series: Series, window: int) -> np.ndarray:
    """
    Trailing mean over ``window`` samples along the first axis. The first
    ``window - 1`` outputs average the available prefix.

    :raises ValueError: If ``window`` < 1.
    """
    if int(window) != window or window < 1:
        raise ValueError(f"window must be a positive integer, got {window!r}")
    values = as_series(series)
    window = min(int(window), len(values))
    head = window - 1
    counts = np.arange(1, head + 1, dtype=np.float64)
    if values.ndim == 2:
        counts = counts[:, None]
    prefix = np.cumsum(values[:head], axis=0) / counts
    full = sliding_window_view(values, window, axis=0).mean(axis=-1)
    return np.concatenate([prefix, full], axis=0)
