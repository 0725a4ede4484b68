from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import NumericError, Tensor

OUTPUT_ACTIVATIONS = ("identity", "sigmoid")
HIDDEN_ACTIVATIONS = ("relu",)


@dataclass
class DenseBlock:
    """Feed-forward stack: affine + relu on every layer but the last.

    The last layer applies ``output_activation``. Parameters are stored as
    :class:`Tensor` leaves so a loss built from :meth:`__call__` can be
    differentiated with respect to them.
    """

    input_dim: int
    layer_dims: tuple[int, ...]
    weights: list[Tensor]
    biases: list[Tensor]
    hidden_activation: str = "relu"
    output_activation: str = "identity"
    name: str = "block"
    last_hidden: list[Tensor] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.layer_dims = tuple(int(d) for d in self.layer_dims)
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        fan_in = self.input_dim
        for i, (dim, w, b) in enumerate(zip(self.layer_dims, self.weights, self.biases)):
            if w.shape != (fan_in, dim) or b.shape != (dim,):
                raise ValueError(f"{self.name} layer {i}: bad parameter shapes {w.shape}, {b.shape}")
            w.name, b.name = f"{self.name}.W{i}", f"{self.name}.b{i}"
            fan_in = dim

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def parameters(self) -> list[Tensor]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def n_parameters(self) -> int:
        return int(np.sum([p.data.size for p in self.parameters()]))

    def __call__(self, x, keep_hidden: bool = False) -> Tensor:
        x = ad.tensor(x)
        squeeze = x.data.ndim == 1
        if squeeze:
            x = ad.reshape(x, (1, -1))
        if x.shape[-1] != self.input_dim:
            raise ValueError(f"{self.name}: expected input dim {self.input_dim}, got {x.shape[-1]}")
        hidden = []
        h = x
        last = len(self.layer_dims) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = ad.relu(h)
            elif self.output_activation == "sigmoid":
                h = ad.sigmoid(h)
            if not np.all(np.isfinite(h.data)):
                raise NumericError(f"non-finite activation in {self.name} layer {i}")
            hidden.append(h)
        if keep_hidden:
            self.last_hidden = hidden
        if squeeze:
            h = ad.reshape(h, (-1,))
        return h

    def forward(self, x) -> np.ndarray:
        """Plain numpy evaluation whose rows do not depend on the rest of the batch.

        BLAS picks kernels by matrix shape, so ``x @ w`` can round differently
        for a row scored alone and the same row inside a larger batch. Here
        each affine layer accumulates ``x[:, j] * w[j]`` over ``j`` in a fixed
        order with elementwise operations only, which makes a row's output a
        function of that row alone. Training keeps the faster BLAS path.
        """
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        h = x.reshape(1, -1) if squeeze else x
        if h.ndim != 2 or h.shape[1] != self.input_dim:
            raise ValueError(f"{self.name}: expected input dim {self.input_dim}, got {h.shape[-1]}")
        last = len(self.layer_dims) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            acc = np.zeros((h.shape[0], w.data.shape[1]))
            for j in range(w.data.shape[0]):
                acc += h[:, j:j + 1] * w.data[j]
            h = acc + b.data
            if i < last:
                h = np.maximum(h, 0.0)
            elif self.output_activation == "sigmoid":
                h = ad.sigmoid(h).data
            if not np.all(np.isfinite(h)):
                raise NumericError(f"non-finite activation in {self.name} layer {i}")
        return h.reshape(-1) if squeeze else h

    def state(self) -> dict:
        return {
            "name": self.name,
            "input_dim": self.input_dim,
            "layer_dims": list(self.layer_dims),
            "hidden_activation": self.hidden_activation,
            "output_activation": self.output_activation,
            "weights": [w.data for w in self.weights],
            "biases": [b.data for b in self.biases],
        }

    @classmethod
    def from_state(cls, st: dict) -> "DenseBlock":
        return cls(
            input_dim=int(st["input_dim"]),
            layer_dims=tuple(st["layer_dims"]),
            weights=[Tensor(np.array(w, dtype=np.float64), requires_grad=True) for w in st["weights"]],
            biases=[Tensor(np.array(b, dtype=np.float64), requires_grad=True) for b in st["biases"]],
            hidden_activation=st.get("hidden_activation", "relu"),
            output_activation=st["output_activation"],
            name=st.get("name", "block"),
        )

    def copy(self) -> "DenseBlock":
        return DenseBlock.from_state(self.state())


def init_block(input_dim: int, layer_dims: Sequence[int], output_activation: str = "identity",
               seed: int = 0, name: str = "block") -> DenseBlock:
    """Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases."""
    if input_dim < 1 or not layer_dims or min(layer_dims) < 1:
        raise ValueError("dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    fan_in = input_dim
    for dim in layer_dims:
        limit = np.sqrt(6.0 / (fan_in + dim))
        weights.append(Tensor(rng.uniform(-limit, limit, size=(fan_in, dim)), requires_grad=True))
        biases.append(Tensor(np.zeros(dim), requires_grad=True))
        fan_in = dim
    return DenseBlock(input_dim, tuple(layer_dims), weights, biases,
                      output_activation=output_activation, name=name)
