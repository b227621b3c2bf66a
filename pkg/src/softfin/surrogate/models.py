"""
Layer stacks of the two surrogate stages.

PosNet: two convolutions followed by three linear layers.
ForceNet: one LSTM, two hidden linear layers, dropout and a linear output.
"""

from typing import List

from softfin.nn import LSTM, Activation, Conv1d, Dropout, Layer, Linear, Network

# Parameter counts of the published models, reported next to ours.
REFERENCE_POSNET_PARAMETERS = 113601
REFERENCE_FORCENET_PARAMETERS = 129794

POSNET_CHANNELS = 3
FORCENET_CHANNELS = 2
KERNEL = 5


def posnet_layers(window: int = 100) -> List[Layer]:
    """
    conv1d(3->16, k5) -> relu -> conv1d(16->32, k5) -> relu -> flatten ->
    linear(->64) -> relu -> linear(64->32) -> relu -> linear(32->1).
    """
    first = Conv1d(POSNET_CHANNELS, 16, KERNEL)
    second = Conv1d(16, 32, KERNEL)
    length = second.output_length(first.output_length(window))
    return [
        first,
        Activation("relu"),
        second,
        Activation("relu"),
        Linear(32 * length, 64, flatten=True),
        Activation("relu"),
        Linear(64, 32),
        Activation("relu"),
        Linear(32, 1),
    ]


def forcenet_layers(hidden: int = 96, dropout: float = 0.2) -> List[Layer]:
    """
    lstm(2->hidden) -> linear(hidden->64) -> relu -> linear(64->32) -> relu ->
    dropout -> linear(32->2).
    """
    return [
        LSTM(FORCENET_CHANNELS, hidden),
        Linear(hidden, 64),
        Activation("relu"),
        Linear(64, 32),
        Activation("relu"),
        Dropout(dropout),
        Linear(32, 2),
    ]


def build_posnet(window: int = 100, seed: int = 0) -> Network:
    """
    Freshly initialized PosNet for ``window`` samples.
    """
    return Network.build(posnet_layers(window), seed=seed, name="posnet")


def build_forcenet(hidden: int = 96, dropout: float = 0.2, seed: int = 0) -> Network:
    """
    Freshly initialized ForceNet.
    """
    return Network.build(forcenet_layers(hidden, dropout), seed=seed, name="forcenet")
