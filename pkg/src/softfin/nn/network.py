"""
Sequential networks over the substrate layers, with a tape based backward.

Example Usage:

```python
net = Network.build([Linear(2, 8), Activation("tanh"), Linear(8, 1)], seed=0)
out, _, tape = net.forward(x, mode="train")
grads = net.backward(tape, np.ones_like(out))
```
"""

import copy
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from softfin.errors import ConfigurationError, StaleTapeError
from softfin.nn.layers import DTYPE, LSTM, Array, Layer, RecurrentState, describe_layers

MODES = ("train", "eval")


@dataclass
class Tape:
    """
    Everything backward needs from one forward pass.
    """

    network_id: int
    version: int
    mode: str
    caches: List[Any]
    output_shape: Tuple[int, ...]


@dataclass
class Gradients:
    """
    Parameter gradients keyed like ``Network.parameters()``, plus the
    gradient w.r.t. the network input.
    """

    params: Dict[str, Array]
    input: Array


class Network:
    """
    Ordered stack of layers.

    :param layers: Layers in application order.
    :param name: Used in error messages and checkpoints.
    """

    def __init__(self, layers: Sequence[Layer], name: str = "network"):
        if len(layers) == 0:
            raise ConfigurationError("A network needs at least one layer.")
        self.layers: List[Layer] = list(layers)
        self.name = name
        self.version = 0

    @classmethod
    def build(cls, layers: Sequence[Layer], seed: int, name: str = "network"):
        """
        Create a network and draw its initial parameters from ``seed``.
        """
        rng = np.random.default_rng(seed)
        for layer in layers:
            layer.init_parameters(rng)
        return cls(layers, name)

    def __repr__(self) -> str:
        return f"Network({self.name}: {describe_layers(self.layers)})"

    @property
    def recurrent_layers(self) -> List[LSTM]:
        """
        LSTM layers in order; each one owns an entry of the recurrent state.
        """
        return [layer for layer in self.layers if isinstance(layer, LSTM)]

    @property
    def is_recurrent(self) -> bool:
        """
        True when the network holds an LSTM.
        """
        return len(self.recurrent_layers) > 0

    def initial_state(self, batch: int) -> List[RecurrentState]:
        """
        Zero recurrent state for ``batch`` sequences.
        """
        return [layer.initial_state(batch) for layer in self.recurrent_layers]

    def parameters(self) -> Dict[str, Array]:
        """
        Live parameter arrays keyed ``<index>.<kind>.<name>``, in layer order.
        """
        params = {}
        for index, layer in enumerate(self.layers):
            for name, value in layer.params.items():
                params[f"{index}.{layer.kind}.{name}"] = value
        return params

    @property
    def parameter_count(self) -> int:
        """
        Total number of scalar parameters.
        """
        return int(sum(value.size for value in self.parameters().values()))

    def load_parameters(self, values: Dict[str, Array]) -> None:
        """
        Overwrite parameters in place; invalidates earlier tapes.

        :raises ConfigurationError: On a missing name or shape mismatch.
        """
        for name, target in self.parameters().items():
            if name not in values:
                raise ConfigurationError(f"{self.name}: parameter {name} missing")
            value = np.asarray(values[name], dtype=DTYPE)
            if value.shape != target.shape:
                raise ConfigurationError(
                    f"{self.name}: parameter {name} has shape {value.shape}, "
                    f"expected {target.shape}"
                )
            np.copyto(target, value)
        self.version += 1

    def snapshot(self) -> Dict[str, Array]:
        """
        Independent copy of all parameters.
        """
        return {name: value.copy() for name, value in self.parameters().items()}

    def copy(self) -> "Network":
        """
        Deep copy with independent parameters.
        """
        return Network(copy.deepcopy(self.layers), self.name)

    def _check_input(self, index: int, layer: Layer, shape: Tuple[int, ...]) -> None:
        reason = layer.check_input(shape)
        if reason is not None:
            raise ConfigurationError(
                f"{self.name}: layer {index} {layer.description} {reason}, "
                f"got input of shape {shape}"
            )

    def forward(
        self,
        x: Array,
        mode: str = "eval",
        state: Optional[List[RecurrentState]] = None,
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[Array, Optional[List[RecurrentState]], Tape]:
        """
        Run the network.

        :param x: Input batch.
        :param mode: "train" records dropout masks; "eval" is deterministic.
        :param state: One (h, c) pair per LSTM layer; zeros when omitted.
        :param rng: Dropout mask source, required in train mode with dropout.
        :return: Output, final recurrent state (None without LSTM), tape.
        :raises ConfigurationError: On an input that does not fit a layer.
        """
        if mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
        x = np.asarray(x, dtype=DTYPE)
        recurrent = self.recurrent_layers
        if state is not None and not recurrent:
            raise ConfigurationError(f"{self.name} has no LSTM but got a state")
        if recurrent and state is None:
            state = self.initial_state(x.shape[0])
        if recurrent and len(state) != len(recurrent):
            raise ConfigurationError(
                f"{self.name} needs {len(recurrent)} recurrent states, got {len(state)}"
            )

        train = mode == "train"
        caches = []
        new_state: List[RecurrentState] = []
        pending = list(state or [])
        out = x
        for index, layer in enumerate(self.layers):
            self._check_input(index, layer, out.shape)
            layer_state = pending.pop(0) if isinstance(layer, LSTM) else None
            out, cache, final_state = layer.forward(out, train, rng, layer_state)
            caches.append(cache)
            if final_state is not None:
                new_state.append(final_state)
        tape = Tape(id(self), self.version, mode, caches, out.shape)
        return out, (new_state if recurrent else None), tape

    def backward(self, tape: Tape, output_grad: Array) -> Gradients:
        """
        Backpropagate ``output_grad`` through the recorded pass.

        :raises StaleTapeError: If the tape is from another network, an
            eval-mode pass, or predates a parameter update.
        """
        if tape.network_id != id(self):
            raise StaleTapeError(f"{self.name}: tape belongs to another network")
        if tape.mode != "train":
            raise StaleTapeError(f"{self.name}: tape was recorded in eval mode")
        if tape.version != self.version:
            raise StaleTapeError(
                f"{self.name}: parameters changed since the tape was recorded"
            )
        grad = np.asarray(output_grad, dtype=DTYPE)
        if grad.shape != tape.output_shape:
            raise ConfigurationError(
                f"{self.name}: output gradient shape {grad.shape} does not match "
                f"output shape {tape.output_shape}"
            )
        per_layer: List[Dict[str, Array]] = [{} for _ in self.layers]
        for index in reversed(range(len(self.layers))):
            layer = self.layers[index]
            grad, per_layer[index] = layer.backward(tape.caches[index], grad)
        params = {}
        for index, layer in enumerate(self.layers):
            for name in layer.params:
                params[f"{index}.{layer.kind}.{name}"] = per_layer[index][name]
        return Gradients(params, grad)
