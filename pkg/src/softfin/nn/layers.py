"""
The five layer kinds of the neural substrate: conv1d, linear, lstm, dropout
and activation (tanh | relu). Every layer owns float64 parameter arrays and
implements an explicit forward that returns a cache, and a backward that
consumes it.

Shapes:
    conv1d      (batch, channels, length)   -> (batch, out_channels, out_length)
    linear      (..., in)                   -> (..., out); with ``flatten`` the
                (batch, *rest) input is flattened first
    lstm        (batch, time, in)           -> (batch, time, hidden) or
                                               (batch, hidden) for the last step
    dropout     any                         -> same
    activation  any                         -> same
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from softfin.errors import ConfigurationError

Array = np.ndarray
RecurrentState = Tuple[Array, Array]
DTYPE = np.float64


def sigmoid(z: Array) -> Array:
    """
    Logistic function written through tanh, finite for any finite input.
    """
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _positive_int(value: Any, what: str) -> int:
    if int(value) != value or int(value) < 1:
        raise ConfigurationError(f"{what} must be a positive integer, got {value!r}")
    return int(value)


class Layer(ABC):
    """
    Base class of all layer kinds.
    """

    kind: str = ""

    def __init__(self):
        self.params: Dict[str, Array] = {}

    @property
    @abstractmethod
    def description(self) -> str:
        """
        Human readable form, e.g. ``linear(64->32)``.
        """

    @property
    @abstractmethod
    def spec_fields(self) -> Dict[str, Any]:
        """
        Constructor arguments, written into checkpoint headers.
        """

    def spec(self) -> str:
        """
        One-line text form used by the checkpoint container.
        """
        fields = " ".join(f"{key}={value!r}" for key, value in self.spec_fields.items())
        return f"{self.kind} {fields}".strip()

    def init_parameters(self, rng: np.random.Generator) -> None:
        """
        Draw initial parameter values.
        """

    def check_input(self, shape: Tuple[int, ...]) -> Optional[str]:
        """
        Return a reason when ``shape`` cannot feed this layer.
        """
        del shape
        return None

    @abstractmethod
    def forward(
        self,
        x: Array,
        train: bool,
        rng: Optional[np.random.Generator],
        state: Optional[RecurrentState] = None,
    ) -> Tuple[Array, Any, Optional[RecurrentState]]:
        """
        Compute the layer output, the cache needed by backward and, for
        recurrent layers, the final recurrent state.
        """

    @abstractmethod
    def backward(self, cache: Any, dy: Array) -> Tuple[Array, Dict[str, Array]]:
        """
        Gradient w.r.t. the layer input and the parameter gradients.
        """

    def __repr__(self) -> str:
        return self.description


class Conv1d(Layer):
    """
    One dimensional cross-correlation with bias, no padding.
    """

    kind = "conv1d"

    def __init__(
        self, in_channels: int, out_channels: int, kernel: int, stride: int = 1
    ):
        super().__init__()
        self.in_channels = _positive_int(in_channels, "in_channels")
        self.out_channels = _positive_int(out_channels, "out_channels")
        self.kernel = _positive_int(kernel, "kernel")
        self.stride = _positive_int(stride, "stride")
        self.params = {
            "weight": np.zeros(
                (self.out_channels, self.in_channels, self.kernel), DTYPE
            ),
            "bias": np.zeros(self.out_channels, DTYPE),
        }

    @property
    def description(self) -> str:
        return (
            f"conv1d({self.in_channels}->{self.out_channels}, "
            f"k={self.kernel}, s={self.stride})"
        )

    @property
    def spec_fields(self) -> Dict[str, Any]:
        return {
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel": self.kernel,
            "stride": self.stride,
        }

    def output_length(self, length: int) -> int:
        """
        Output length for an input of ``length`` samples.
        """
        return (length - self.kernel) // self.stride + 1

    def init_parameters(self, rng: np.random.Generator) -> None:
        bound = np.sqrt(1.0 / (self.in_channels * self.kernel))
        self.params["weight"][...] = rng.uniform(
            -bound, bound, self.params["weight"].shape
        )
        self.params["bias"][...] = rng.uniform(-bound, bound, self.out_channels)

    def check_input(self, shape: Tuple[int, ...]) -> Optional[str]:
        if len(shape) != 3 or shape[1] != self.in_channels:
            return f"expects (batch, {self.in_channels}, length)"
        if shape[2] < self.kernel:
            return f"needs at least {self.kernel} samples"
        return None

    def forward(self, x, train, rng, state=None):
        cols = sliding_window_view(x, self.kernel, axis=2)[:, :, :: self.stride, :]
        batch, channels, out_length, kernel = cols.shape
        columns = cols.transpose(0, 2, 1, 3).reshape(
            batch * out_length, channels * kernel
        )
        weight = self.params["weight"].reshape(self.out_channels, channels * kernel)
        y = columns @ weight.T + self.params["bias"]
        y = y.reshape(batch, out_length, self.out_channels).transpose(0, 2, 1)
        return np.ascontiguousarray(y), (x.shape, columns, out_length), None

    def backward(self, cache, dy):
        shape, columns, out_length = cache
        batch, channels, _ = shape
        dy_rows = dy.transpose(0, 2, 1).reshape(batch * out_length, self.out_channels)
        weight = self.params["weight"].reshape(
            self.out_channels, channels * self.kernel
        )
        grads = {
            "weight": (dy_rows.T @ columns).reshape(self.params["weight"].shape),
            "bias": dy_rows.sum(axis=0),
        }
        dcols = (dy_rows @ weight).reshape(batch, out_length, channels, self.kernel)
        dx = np.zeros(shape, DTYPE)
        span = self.stride * (out_length - 1) + 1
        for k in range(self.kernel):
            dx[:, :, k : k + span : self.stride] += dcols[:, :, :, k].transpose(0, 2, 1)
        return dx, grads


class Linear(Layer):
    """
    Affine map over the last axis, optionally flattening a conv feature map first.
    """

    kind = "linear"

    def __init__(self, in_features: int, out_features: int, flatten: bool = False):
        super().__init__()
        self.in_features = _positive_int(in_features, "in_features")
        self.out_features = _positive_int(out_features, "out_features")
        self.flatten = bool(flatten)
        self.params = {
            "weight": np.zeros((self.out_features, self.in_features), DTYPE),
            "bias": np.zeros(self.out_features, DTYPE),
        }

    @property
    def description(self) -> str:
        prefix = "flatten+" if self.flatten else ""
        return f"{prefix}linear({self.in_features}->{self.out_features})"

    @property
    def spec_fields(self) -> Dict[str, Any]:
        return {
            "in_features": self.in_features,
            "out_features": self.out_features,
            "flatten": self.flatten,
        }

    def init_parameters(self, rng: np.random.Generator) -> None:
        bound = np.sqrt(1.0 / self.in_features)
        self.params["weight"][...] = rng.uniform(
            -bound, bound, self.params["weight"].shape
        )
        self.params["bias"][...] = rng.uniform(-bound, bound, self.out_features)

    def check_input(self, shape: Tuple[int, ...]) -> Optional[str]:
        if self.flatten:
            if len(shape) < 2 or int(np.prod(shape[1:])) != self.in_features:
                return f"expects {self.in_features} features per example once flattened"
        elif len(shape) < 1 or shape[-1] != self.in_features:
            return f"expects last axis of size {self.in_features}"
        return None

    def forward(self, x, train, rng, state=None):
        inputs = x.reshape(x.shape[0], -1) if self.flatten else x
        y = inputs @ self.params["weight"].T + self.params["bias"]
        return y, (x.shape, inputs), None

    def backward(self, cache, dy):
        shape, inputs = cache
        rows = inputs.reshape(-1, self.in_features)
        dy_rows = dy.reshape(-1, self.out_features)
        grads = {"weight": dy_rows.T @ rows, "bias": dy_rows.sum(axis=0)}
        dx = (dy @ self.params["weight"]).reshape(shape)
        return dx, grads


class LSTM(Layer):
    """
    Single LSTM layer unrolled over the time axis, gate order (i, f, g, o).
    Backward is full backpropagation through time.
    """

    kind = "lstm"

    def __init__(self, in_features: int, hidden: int, return_sequences: bool = False):
        super().__init__()
        self.in_features = _positive_int(in_features, "in_features")
        self.hidden = _positive_int(hidden, "hidden")
        self.return_sequences = bool(return_sequences)
        gates = 4 * self.hidden
        self.params = {
            "w_ih": np.zeros((gates, self.in_features), DTYPE),
            "w_hh": np.zeros((gates, self.hidden), DTYPE),
            "bias": np.zeros(gates, DTYPE),
        }

    @property
    def description(self) -> str:
        return f"lstm({self.in_features}->{self.hidden})"

    @property
    def spec_fields(self) -> Dict[str, Any]:
        return {
            "in_features": self.in_features,
            "hidden": self.hidden,
            "return_sequences": self.return_sequences,
        }

    def init_parameters(self, rng: np.random.Generator) -> None:
        bound = np.sqrt(1.0 / self.hidden)
        for name in ("w_ih", "w_hh"):
            self.params[name][...] = rng.uniform(-bound, bound, self.params[name].shape)
        self.params["bias"][...] = 0.0
        self.params["bias"][self.hidden : 2 * self.hidden] = 1.0

    def initial_state(self, batch: int) -> RecurrentState:
        """
        All-zero hidden and cell state.
        """
        shape = (batch, self.hidden)
        return np.zeros(shape, DTYPE), np.zeros(shape, DTYPE)

    def check_input(self, shape: Tuple[int, ...]) -> Optional[str]:
        if len(shape) != 3 or shape[2] != self.in_features or shape[1] < 1:
            return f"expects (batch, time, {self.in_features})"
        return None

    def forward(self, x, train, rng, state=None):
        batch, steps, _ = x.shape
        hidden = self.hidden
        h, c = state if state is not None else self.initial_state(batch)
        if h.shape != (batch, hidden) or c.shape != (batch, hidden):
            raise ConfigurationError(
                f"{self.description} recurrent state must be ({batch}, {hidden})"
            )
        w_hh = self.params["w_hh"]
        projected = x @ self.params["w_ih"].T + self.params["bias"]
        gates = np.empty((batch, steps, 4 * hidden), DTYPE)
        cells = np.empty((batch, steps, hidden), DTYPE)
        h_prev = np.empty((batch, steps, hidden), DTYPE)
        c_prev = np.empty((batch, steps, hidden), DTYPE)
        outputs = np.empty((batch, steps, hidden), DTYPE)
        for t in range(steps):
            h_prev[:, t] = h
            c_prev[:, t] = c
            z = projected[:, t] + h @ w_hh.T
            i = sigmoid(z[:, :hidden])
            f = sigmoid(z[:, hidden : 2 * hidden])
            g = np.tanh(z[:, 2 * hidden : 3 * hidden])
            o = sigmoid(z[:, 3 * hidden :])
            c = f * c + i * g
            cells[:, t] = np.tanh(c)
            h = o * cells[:, t]
            gates[:, t] = np.concatenate([i, f, g, o], axis=1)
            outputs[:, t] = h
        y = outputs if self.return_sequences else outputs[:, -1]
        cache = (x, gates, cells, h_prev, c_prev)
        return y, cache, (h.copy(), c.copy())

    def backward(self, cache, dy):
        x, gates, cells, h_prev, c_prev = cache
        batch, steps, _ = x.shape
        hidden = self.hidden
        if self.return_sequences:
            dh_seq = dy
        else:
            dh_seq = np.zeros((batch, steps, hidden), DTYPE)
            dh_seq[:, -1] = dy
        w_hh = self.params["w_hh"]
        dz_all = np.empty((batch, steps, 4 * hidden), DTYPE)
        dh_next = np.zeros((batch, hidden), DTYPE)
        dc_next = np.zeros((batch, hidden), DTYPE)
        for t in reversed(range(steps)):
            i = gates[:, t, :hidden]
            f = gates[:, t, hidden : 2 * hidden]
            g = gates[:, t, 2 * hidden : 3 * hidden]
            o = gates[:, t, 3 * hidden :]
            tanh_c = cells[:, t]
            dh = dh_seq[:, t] + dh_next
            dc = dc_next + dh * o * (1.0 - tanh_c * tanh_c)
            dz_all[:, t] = np.concatenate(
                [
                    dc * g * i * (1.0 - i),
                    dc * c_prev[:, t] * f * (1.0 - f),
                    dc * i * (1.0 - g * g),
                    dh * tanh_c * o * (1.0 - o),
                ],
                axis=1,
            )
            dc_next = dc * f
            dh_next = dz_all[:, t] @ w_hh
        dz_rows = dz_all.reshape(-1, 4 * hidden)
        grads = {
            "w_ih": dz_rows.T @ x.reshape(-1, self.in_features),
            "w_hh": dz_rows.T @ h_prev.reshape(-1, hidden),
            "bias": dz_rows.sum(axis=0),
        }
        dx = dz_all @ self.params["w_ih"]
        return dx, grads


class Dropout(Layer):
    """
    Inverted dropout; identity in eval mode. Masks come from the caller's RNG.
    """

    kind = "dropout"

    def __init__(self, p: float):
        super().__init__()
        if not 0.0 <= float(p) < 1.0:
            raise ConfigurationError(f"dropout p must be in [0, 1), got {p!r}")
        self.p = float(p)

    @property
    def description(self) -> str:
        return f"dropout({self.p})"

    @property
    def spec_fields(self) -> Dict[str, Any]:
        return {"p": self.p}

    def forward(self, x, train, rng, state=None):
        if not train or self.p == 0.0:
            return x, None, None
        if rng is None:
            raise ConfigurationError(f"{self.description} needs an RNG in train mode")
        mask = (rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * mask, mask, None

    def backward(self, cache, dy):
        if cache is None:
            return dy, {}
        return dy * cache, {}


class Activation(Layer):
    """
    Elementwise tanh or relu.
    """

    kind = "activation"
    FUNCTIONS = ("tanh", "relu")

    def __init__(self, function: str):
        super().__init__()
        if function not in self.FUNCTIONS:
            raise ConfigurationError(
                f"activation must be one of {self.FUNCTIONS}, got {function!r}"
            )
        self.function = function

    @property
    def description(self) -> str:
        return self.function

    @property
    def spec_fields(self) -> Dict[str, Any]:
        return {"function": self.function}

    def forward(self, x, train, rng, state=None):
        if self.function == "tanh":
            y = np.tanh(x)
            return y, y, None
        mask = x > 0.0
        return x * mask, mask, None

    def backward(self, cache, dy):
        if self.function == "tanh":
            return dy * (1.0 - cache * cache), {}
        return dy * cache, {}


LAYER_KINDS = {
    cls.kind: cls for cls in (Conv1d, Linear, LSTM, Dropout, Activation)
}


def layer_from_spec(text: str) -> Layer:
    """
    Rebuild a layer (with zero parameters) from its ``spec()`` line.

    :raises ConfigurationError: If the kind or an argument is unknown.
    """
    kind, *pairs = text.split()
    if kind not in LAYER_KINDS:
        raise ConfigurationError(f"Unknown layer kind {kind!r}")
    kwargs: Dict[str, Any] = {}
    for pair in pairs:
        key, _, value = pair.partition("=")
        if value in ("True", "False"):
            kwargs[key] = value == "True"
        elif value.startswith("'"):
            kwargs[key] = value.strip("'")
        elif "." in value or "e" in value:
            kwargs[key] = float(value)
        else:
            kwargs[key] = int(value)
    try:
        return LAYER_KINDS[kind](**kwargs)
    except TypeError as e:
        raise ConfigurationError(f"Bad layer spec {text!r}: {e}") from e


def describe_layers(layers: Sequence[Layer]) -> str:
    """
    Arrow separated layer descriptions.
    """
    return " -> ".join(layer.description for layer in layers)
