"""Fully-connected ReLU networks: representation, evaluation and JSON storage."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

RELU = "relu"
IDENTITY = "identity"
_ACTIVATIONS = (RELU, IDENTITY)


class ShapeError(ValueError):
    """Raised when dimensions of layers or inputs do not line up."""


class NetworkFormatError(ValueError):
    """Raised when a serialized network cannot be parsed."""


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray
    biases: np.ndarray
    activation: str = RELU

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, ndmin=2)
        b = np.array(self.biases, dtype=np.float64).reshape(-1)
        if w.ndim != 2:
            raise ShapeError(f"weights must be 2-D, got shape {w.shape}")
        if w.shape[0] != b.shape[0]:
            raise ShapeError(
                f"weights have {w.shape[0]} rows but biases have {b.shape[0]} entries"
            )
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters must be finite")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def in_width(self) -> int:
        return self.weights.shape[1]

    @property
    def out_width(self) -> int:
        return self.weights.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        z = x @ self.weights.T + self.biases
        if self.activation == RELU:
            return np.maximum(z, 0.0)
        return z


@dataclass(frozen=True)
class Network:
    """A layered ReLU network; by convention the last layer is linear.

    ``width`` counts the largest layer output (the input layer is excluded)
    and ``depth`` counts layers including the output layer.
    """

    input_dim: int
    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if self.input_dim < 1:
            raise ShapeError("input_dim must be positive")
        if not layers:
            raise ShapeError("a network needs at least one layer")
        prev = self.input_dim
        for t, layer in enumerate(layers):
            if layer.in_width != prev:
                raise ShapeError(
                    f"layer {t} expects input width {layer.in_width}, got {prev}"
                )
            prev = layer.out_width
        object.__setattr__(self, "layers", layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def width(self) -> int:
        return max(layer.out_width for layer in self.layers)

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_width

    @property
    def widths(self) -> list[int]:
        return [self.input_dim] + [layer.out_width for layer in self.layers]

    def num_parameters(self) -> int:
        return sum(layer.weights.size + layer.biases.size for layer in self.layers)

    def __call__(self, x) -> np.ndarray:
        return forward(self, x)


def _as_input(net: Network, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != net.input_dim:
        raise ShapeError(f"expected inputs of length {net.input_dim}, got shape {np.shape(x)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("inputs must be finite")
    return arr, single


def forward(net: Network, x) -> np.ndarray:
    """Evaluate ``net`` on one input vector or a batch of shape (m, input_dim)."""
    h, single = _as_input(net, x)
    for layer in net.layers:
        h = layer(h)
    return h[0] if single else h


def forward_hidden(net: Network, x, layer_index: int) -> np.ndarray:
    """Post-activation values after the first ``layer_index`` layers (0 = input)."""
    if not 0 <= layer_index <= net.depth:
        raise IndexError(f"layer_index {layer_index} outside [0, {net.depth}]")
    h, single = _as_input(net, x)
    for layer in net.layers[:layer_index]:
        h = layer(h)
    return h[0] if single else h


def concat(first: Network, second: Network) -> Network:
    """Network computing ``second(first(x))``.

    The junction uses whatever activation ``first``'s last layer carries, so
    callers wanting a ReLU junction must build ``first`` that way.
    """
    if first.output_dim != second.input_dim:
        raise ShapeError(
            f"cannot feed output width {first.output_dim} into input width {second.input_dim}"
        )
    return Network(first.input_dim, first.layers + second.layers)


def sequential(input_dim: int, layers: Sequence[Layer]) -> Network:
    return Network(input_dim, tuple(layers))


def identity_network(dim: int, activation: str = IDENTITY) -> Network:
    return Network(dim, (Layer(np.eye(dim), np.zeros(dim), activation),))


def param_count(width: int, depth: int) -> int:
    """Parameter count of a width-``width``, depth-``depth`` net with scalar input and output."""
    if width < 1:
        raise ShapeError("width must be positive")
    if depth < 2:
        raise ShapeError("the closed form needs depth >= 2")
    d, h = width, depth
    return d * d * (h - 2) + d * (h - 1) + 2 * d + 1


def uniform_shape(input_dim: int, width: int, depth: int, output_dim: int = 1) -> list[int]:
    """Layer widths ``[input, width, ..., width, output]`` with ``depth`` layers."""
    if depth < 1:
        raise ShapeError("depth must be at least 1")
    return [input_dim] + [width] * (depth - 1) + [output_dim]


# -- serialization ---------------------------------------------------------


def to_dict(net: Network) -> dict:
    return {
        "input_dim": net.input_dim,
        "layers": [
            {
                "activation": layer.activation,
                "weights": layer.weights.tolist(),
                "biases": layer.biases.tolist(),
            }
            for layer in net.layers
        ],
    }


def from_dict(doc: dict) -> Network:
    if not isinstance(doc, dict):
        raise NetworkFormatError("network document must be a JSON object")
    try:
        input_dim = doc["input_dim"]
        raw_layers = doc["layers"]
    except KeyError as exc:
        raise NetworkFormatError(f"missing field {exc.args[0]!r}") from None
    if not isinstance(input_dim, int) or isinstance(input_dim, bool):
        raise NetworkFormatError("field 'input_dim' must be an integer")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise NetworkFormatError("field 'layers' must be a non-empty list")

    layers = []
    prev = input_dim
    for t, raw in enumerate(raw_layers):
        where = f"layers[{t}]"
        if not isinstance(raw, dict):
            raise NetworkFormatError(f"{where}: expected an object")
        for key in ("activation", "weights", "biases"):
            if key not in raw:
                raise NetworkFormatError(f"{where}: missing field {key!r}")
        rows = raw["weights"]
        biases = raw["biases"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise NetworkFormatError(f"{where}.weights: expected a list of rows")
        if not isinstance(biases, list):
            raise NetworkFormatError(f"{where}.biases: expected a list")
        if len(rows) != len(biases):
            raise NetworkFormatError(
                f"{where}.weights: {len(rows)} rows but {len(biases)} biases"
            )
        for r, row in enumerate(rows):
            if len(row) != prev:
                raise NetworkFormatError(
                    f"{where}.weights[{r}]: expected {prev} columns, got {len(row)}"
                )
        if raw["activation"] not in _ACTIVATIONS:
            raise NetworkFormatError(f"{where}.activation: unknown value {raw['activation']!r}")
        try:
            layer = Layer(
                np.array(rows, dtype=np.float64).reshape(len(rows), prev),
                np.array(biases, dtype=np.float64),
                raw["activation"],
            )
        except (TypeError, ValueError) as exc:
            raise NetworkFormatError(f"{where}: {exc}") from None
        layers.append(layer)
        prev = layer.out_width
    try:
        return Network(input_dim, tuple(layers))
    except ShapeError as exc:
        raise NetworkFormatError(str(exc)) from None


def save(net: Network, path) -> None:
    # json writes floats with repr(), the shortest round-tripping form
    Path(path).write_text(json.dumps(to_dict(net)) + "\n")


def load(path) -> Network:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_dict(doc)
