"""
Self-describing checkpoint container shared by surrogate networks, policies
and grid bank entries.

Layout: a UTF-8 text header, then raw little-endian float64 parameter blocks
in header order.

    SOFTFIN-CHECKPOINT 1
    meta <key> <value>
    network <name>
    layer <spec>
    param <name> <dim>x<dim>...
    ...
    end
    <binary blocks>
"""

import os
from typing import Dict, List, Mapping, Tuple

import numpy as np

from softfin.errors import ConfigurationError
from softfin.nn.layers import Layer, layer_from_spec
from softfin.nn.network import Network

MAGIC = "SOFTFIN-CHECKPOINT"
FORMAT_VERSION = 1
_END = b"\nend\n"


def _shape_text(shape: Tuple[int, ...]) -> str:
    return "x".join(str(d) for d in shape) if shape else "scalar"


def _parse_shape(text: str) -> Tuple[int, ...]:
    if text == "scalar":
        return ()
    return tuple(int(d) for d in text.split("x"))


def save_checkpoint(
    path: str, networks: Mapping[str, Network], metadata: Mapping[str, str]
) -> int:
    """
    Write named networks plus string metadata to ``path``.

    :return: Number of bytes written.
    :raises ValueError: If a metadata key has whitespace or a value a newline.
    """
    lines = [f"{MAGIC} {FORMAT_VERSION}"]
    for key, value in metadata.items():
        value = str(value)
        if not key or any(ch.isspace() for ch in key) or "\n" in value:
            raise ValueError(f"Metadata entry {key!r} cannot be stored.")
        lines.append(f"meta {key} {value}")
    blocks = []
    for name, network in networks.items():
        lines.append(f"network {name}")
        for layer in network.layers:
            lines.append(f"layer {layer.spec()}")
        for param_name, value in network.parameters().items():
            lines.append(f"param {param_name} {_shape_text(value.shape)}")
            blocks.append(np.ascontiguousarray(value, dtype="<f8").tobytes())
    payload = ("\n".join(lines)).encode("utf-8") + _END + b"".join(blocks)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as f:
        f.write(payload)
    return len(payload)


def load_checkpoint(path: str) -> Tuple[Dict[str, Network], Dict[str, str]]:
    """
    Read a container written by ``save_checkpoint``.

    :raises FileNotFoundError: If ``path`` does not exist.
    :raises ConfigurationError: If the header or data blocks are malformed.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Checkpoint {path} not found.")
    with open(path, "rb") as f:
        payload = f.read()
    end = payload.find(_END)
    if end < 0:
        raise ConfigurationError(f"{path}: checkpoint header is not terminated")
    header = payload[:end].decode("utf-8").split("\n")
    if header[0] != f"{MAGIC} {FORMAT_VERSION}":
        raise ConfigurationError(f"{path}: not a softfin checkpoint ({header[0]!r})")

    metadata: Dict[str, str] = {}
    specs: Dict[str, List[Layer]] = {}
    shapes: List[Tuple[str, str, Tuple[int, ...]]] = []
    current = None
    for line in header[1:]:
        tag, _, rest = line.partition(" ")
        if tag == "meta":
            key, _, value = rest.partition(" ")
            metadata[key] = value
        elif tag == "network":
            current = rest
            specs[current] = []
        elif tag == "layer" and current is not None:
            specs[current].append(layer_from_spec(rest))
        elif tag == "param" and current is not None:
            param_name, _, shape = rest.partition(" ")
            shapes.append((current, param_name, _parse_shape(shape)))
        else:
            raise ConfigurationError(f"{path}: unexpected header line {line!r}")

    networks = {name: Network(layers, name) for name, layers in specs.items()}
    values: Dict[str, Dict[str, np.ndarray]] = {name: {} for name in networks}
    offset = end + len(_END)
    for network_name, param_name, shape in shapes:
        count = int(np.prod(shape)) if shape else 1
        if offset + 8 * count > len(payload):
            raise ConfigurationError(f"{path}: data ends inside {param_name}")
        block = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
        values[network_name][param_name] = block.reshape(shape).astype(np.float64)
        offset += 8 * count
    if offset != len(payload):
        raise ConfigurationError(f"{path}: trailing bytes after parameter data")
    for name, network in networks.items():
        network.load_parameters(values[name])
        network.version = 0
    return networks, metadata
