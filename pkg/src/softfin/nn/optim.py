"""
Adaptive-moment (Adam) optimizer with bias correction, and global-norm
gradient clipping.
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from softfin.errors import ConfigurationError, NonFiniteError
from softfin.nn.layers import Array


@dataclass
class AdamState:
    """
    Per-parameter moment accumulators plus the update schedule.
    """

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    first_moment: Dict[str, Array] = field(default_factory=dict)
    second_moment: Dict[str, Array] = field(default_factory=dict)


def check_finite_gradients(gradients: Dict[str, Array]) -> None:
    """
    :raises NonFiniteError: Naming the first parameter whose gradient is not finite.
    """
    for name, grad in gradients.items():
        if not np.all(np.isfinite(grad)):
            max_abs = float(np.max(np.abs(grad)))
            raise NonFiniteError(
                f"non-finite gradient for {name} (max |g| = {max_abs})",
                layer=name,
                max_abs=max_abs,
            )


def clip_grad_norm(
    gradients: Dict[str, Array], max_norm: float
) -> Tuple[Dict[str, Array], float]:
    """
    Scale all gradients together so their global L2 norm is at most ``max_norm``.

    :return: Clipped gradients and the norm before clipping.
    """
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in gradients.values())))
    if max_norm <= 0.0 or norm <= max_norm:
        return gradients, norm
    scale = max_norm / (norm + 1e-12)
    return {name: g * scale for name, g in gradients.items()}, norm


def adam_step(
    params: Dict[str, Array], gradients: Dict[str, Array], state: AdamState
) -> Dict[str, Array]:
    """
    One bias-corrected Adam update. Returns new arrays; ``state`` advances.

    :raises NonFiniteError: On a NaN/Inf gradient, before touching the state.
    :raises ConfigurationError: On missing or misshaped gradients.
    """
    check_finite_gradients(gradients)
    for name, value in params.items():
        if name not in gradients or gradients[name].shape != value.shape:
            raise ConfigurationError(f"gradient for {name} missing or misshaped")

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    updated = {}
    for name, value in params.items():
        grad = gradients[name]
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None:
            m = np.zeros_like(value)
            v = np.zeros_like(value)
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        state.first_moment[name] = m
        state.second_moment[name] = v
        m_hat = m / correction1
        v_hat = v / correction2
        step = state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
        updated[name] = value - step
    return updated
