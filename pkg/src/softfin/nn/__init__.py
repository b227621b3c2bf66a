"""
Minimal dense-tensor neural substrate: the five layer kinds the surrogate and
policy networks need, explicit forward/backward with backpropagation through
time, Adam, finite-difference gradient checks and a checkpoint container.
Tensors are float64 numpy arrays.
"""

from softfin.nn.layers import (
    LSTM,
    Activation,
    Conv1d,
    Dropout,
    Layer,
    Linear,
    layer_from_spec,
)
from softfin.nn.network import Gradients, Network, Tape
from softfin.nn.optim import AdamState, adam_step, clip_grad_norm
from softfin.nn.gradcheck import compare_gradients, gradient_check, relative_error
from softfin.nn.checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Layer",
    "Conv1d",
    "Linear",
    "LSTM",
    "Dropout",
    "Activation",
    "layer_from_spec",
    "Network",
    "Tape",
    "Gradients",
    "AdamState",
    "adam_step",
    "clip_grad_norm",
    "gradient_check",
    "compare_gradients",
    "relative_error",
    "save_checkpoint",
    "load_checkpoint",
]
