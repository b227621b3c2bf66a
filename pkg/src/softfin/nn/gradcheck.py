"""
Finite-difference verification of analytic gradients.
"""

from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from softfin.nn.layers import Array, RecurrentState
from softfin.nn.network import Network

LossFunction = Callable[[Array], Tuple[float, Array]]


def relative_error(analytic: float, numeric: float) -> float:
    """
    |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
    """
    return abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))


def compare_gradients(
    loss_at: Callable[[], float],
    params: Dict[str, Array],
    analytic: Dict[str, Array],
    h: float = 1e-5,
    max_entries: Optional[int] = None,
    seed: int = 0,
) -> float:
    """
    Central differences over parameter entries, perturbed in place and restored.

    :param loss_at: Evaluates the loss with the current parameter values.
    :param params: Live parameter arrays, contiguous.
    :param analytic: Gradients to verify, same keys and shapes.
    :param max_entries: Check a seeded random subset of entries per parameter.
    :return: Max relative error over the checked entries.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, value in params.items():
        flat = value.reshape(-1)
        expected = analytic[name].reshape(-1)
        indices = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            indices = rng.choice(flat.size, size=max_entries, replace=False)
        for index in indices:
            original = flat[index]
            flat[index] = original + h
            plus = loss_at()
            flat[index] = original - h
            minus = loss_at()
            flat[index] = original
            numeric = (plus - minus) / (2.0 * h)
            worst = max(worst, relative_error(float(expected[index]), numeric))
    return worst


def gradient_check(
    net: Network,
    x: Array,
    loss_fn: LossFunction,
    state: Optional[List[RecurrentState]] = None,
    h: float = 1e-5,
    seed: int = 0,
    max_entries: Optional[int] = None,
) -> float:
    """
    Max relative error between backward and central differences for ``net``.

    Every forward runs in train mode with a freshly seeded RNG so dropout
    masks are identical across the perturbed passes.

    :param loss_fn: Maps the network output to (loss, d loss / d output).
    """

    def run() -> Tuple[Array, object]:
        out, _, tape = net.forward(
            x, mode="train", state=state, rng=np.random.default_rng(seed)
        )
        return out, tape

    out, tape = run()
    _, output_grad = loss_fn(out)
    grads = net.backward(tape, output_grad)

    def loss_at() -> float:
        return float(loss_fn(run()[0])[0])

    return compare_gradients(
        loss_at, net.parameters(), grads.params, h=h, max_entries=max_entries, seed=seed
    )
