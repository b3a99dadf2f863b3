"""Deep autoencoder with element-weighted squared reconstruction loss.

Inputs are rows of an adjacency matrix, either dense or CSR. With CSR
input the first layer only touches stored entries; the loss still covers
every output position (zeros are reconstructed with weight 1, stored
entries with weight ``alpha``; the weight multiplies the residual before
squaring, so the effective penalty is ``alpha**2``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import AdjacencyVector
from .sparse import SparseRows

ACTIVATIONS = {
    # name -> (function, derivative expressed through the activation output)
    "tanh": (np.tanh, lambda a: 1.0 - a * a),
    "sigmoid": (lambda z: 0.5 * (1.0 + np.tanh(0.5 * z)), lambda a: a * (1.0 - a)),
}


@dataclass
class LayerParams:
    weight: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray    # (out_dim,)


@dataclass
class Autoencoder:
    layers: list[LayerParams]
    activation: str = "tanh"

    def __post_init__(self):
        if len(self.layers) == 0 or len(self.layers) % 2:
            raise ValueError("an autoencoder needs an even, non-zero number of layers")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        dims = self.layer_dims
        for k, layer in enumerate(self.layers):
            if layer.weight.shape != (dims[k + 1], dims[k]) or layer.bias.shape != (dims[k + 1],):
                raise ValueError(f"layer {k + 1} has inconsistent shapes")
        if dims != dims[::-1]:
            raise ValueError(f"layer dims {dims} are not a palindrome")

    @property
    def layer_dims(self) -> list[int]:
        return [self.layers[0].weight.shape[1]] + [l.weight.shape[0] for l in self.layers]

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def embedding_dim(self) -> int:
        return self.layer_dims[self.n_layers // 2]

    def weights(self) -> list[np.ndarray]:
        return [l.weight for l in self.layers]


def init_autoencoder(layer_dims, activation: str = "tanh", seed: int = 0,
                     rng: np.random.Generator | None = None, scale: float = 1.0) -> Autoencoder:
    """Glorot-uniform weights (limit multiplied by ``scale``), zero biases."""
    dims = [int(d) for d in layer_dims]
    if len(dims) < 3 or (len(dims) - 1) % 2:
        raise ValueError("layer_dims must describe an even number of layers")
    if dims != dims[::-1]:
        raise ValueError(f"layer dims {dims} are not a palindrome")
    if min(dims) < 1:
        raise ValueError("layer dims must be positive")
    rng = np.random.default_rng(seed) if rng is None else rng
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = scale * np.sqrt(6.0 / (fan_in + fan_out))
        layers.append(LayerParams(rng.uniform(-limit, limit, size=(fan_out, fan_in)),
                                  np.zeros(fan_out)))
    return Autoencoder(layers, activation)


@dataclass
class ForwardTrace:
    inputs: SparseRows | np.ndarray
    pre_activations: list[np.ndarray]  # Z^1..Z^K
    activations: list[np.ndarray]      # A^1..A^K

    @property
    def embedding(self) -> np.ndarray:
        return self.activations[len(self.activations) // 2 - 1]

    @property
    def reconstruction(self) -> np.ndarray:
        return self.activations[-1]

    def __len__(self) -> int:
        return len(self.activations) + 1


def as_rows(x) -> SparseRows | np.ndarray:
    """Coerce a vector, matrix or adjacency vector to a batch of rows."""
    if isinstance(x, SparseRows):
        return x
    if isinstance(x, AdjacencyVector):
        return SparseRows(np.array([0, len(x.positions)], dtype=np.int64),
                          np.asarray(x.positions, dtype=np.int64),
                          np.asarray(x.values, dtype=np.float64), x.length)
    return np.atleast_2d(np.asarray(x, dtype=np.float64))


def _n_cols(x) -> int:
    return x.n_cols if isinstance(x, SparseRows) else x.shape[1]


def forward(ae: Autoencoder, x) -> ForwardTrace:
    x = as_rows(x)
    if _n_cols(x) != ae.input_dim:
        raise ValueError(f"input length {_n_cols(x)} != autoencoder input {ae.input_dim}")
    act = ACTIVATIONS[ae.activation][0]
    pre, acts = [], []
    a = x
    for k, layer in enumerate(ae.layers):
        if k == 0 and isinstance(x, SparseRows):
            z = np.empty((x.n_rows, layer.weight.shape[0]))
            kernels.sparse_forward(x.indptr, x.indices, x.data, layer.weight, z)
            z += layer.bias
        else:
            z = a @ layer.weight.T + layer.bias
        a = act(z)
        pre.append(z)
        acts.append(a)
    return ForwardTrace(x, pre, acts)


def recon_weights(x, alpha: float) -> np.ndarray:
    """``alpha`` where ``x`` is non-zero, 1 elsewhere."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    return np.where(x != 0, float(alpha), 1.0)


def weighted_recon_loss(x, x_rec, w) -> float:
    """sum_j (w_j * (x_j - x_rec_j))**2"""
    x, x_rec, w = (np.asarray(v, dtype=np.float64) for v in (x, x_rec, w))
    if not (x.shape == x_rec.shape == w.shape):
        raise ValueError("x, reconstruction and weights must have equal shapes")
    return float(np.sum((w * (x - x_rec)) ** 2))


def recon_residual(trace: ForwardTrace, alpha: float, scale=1.0):
    """Scaled weighted loss of a batch and its gradient wrt the reconstruction.

    ``scale`` is a scalar or one factor per row.
    """
    x, a = trace.inputs, trace.reconstruction
    row_scale = np.broadcast_to(np.asarray(scale, dtype=np.float64), (a.shape[0],))
    row_scale = np.ascontiguousarray(row_scale)
    grad = np.empty_like(a)
    if isinstance(x, SparseRows):
        loss = kernels.weighted_residual(x.indptr, x.indices, x.data, a,
                                         float(alpha) ** 2, row_scale, grad)
        return loss, grad
    w2 = np.where(x != 0, float(alpha) ** 2, 1.0)
    diff = a - x
    np.multiply(2.0 * row_scale[:, None] * w2, diff, out=grad)
    return float(row_scale @ np.sum(w2 * diff * diff, axis=1)), grad


@dataclass
class Gradients:
    loss: float
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    embedding: np.ndarray | None = None  # total gradient reaching the embedding layer


def backward(ae: Autoencoder, trace: ForwardTrace, alpha: float,
             upstream_embedding_grad=None, scale=1.0) -> Gradients:
    """Exact gradients of ``scale * weighted loss`` plus an injected embedding term.

    ``scale`` may be a scalar or a per-row vector.
    ``upstream_embedding_grad`` (rows x embedding_dim) is added to the
    gradient flowing into the embedding layer, which is how a supervised
    loss on the embeddings reaches the encoder.
    """
    K = ae.n_layers
    if len(trace.activations) != K:
        raise ValueError("trace does not belong to this autoencoder")
    deriv = ACTIVATIONS[ae.activation][1]
    loss, d_a = recon_residual(trace, alpha, scale)
    d_weights: list = [None] * K
    d_biases: list = [None] * K
    d_emb = None
    for k in range(K, 0, -1):
        if k == K // 2:
            if upstream_embedding_grad is not None:
                up = np.asarray(upstream_embedding_grad, dtype=np.float64)
                if up.shape != d_a.shape:
                    raise ValueError(f"upstream gradient shape {up.shape} != {d_a.shape}")
                d_a = d_a + up
            d_emb = d_a
        d_z = d_a * deriv(trace.activations[k - 1])
        layer = ae.layers[k - 1]
        if k == 1:
            x = trace.inputs
            if isinstance(x, SparseRows):
                gw = np.zeros_like(layer.weight)
                kernels.sparse_weight_grad(x.indptr, x.indices, x.data, d_z, gw)
            else:
                gw = d_z.T @ x
        else:
            gw = d_z.T @ trace.activations[k - 2]
        d_weights[k - 1] = gw
        d_biases[k - 1] = d_z.sum(axis=0)
        if k > 1:
            d_a = d_z @ layer.weight
    return Gradients(loss, d_weights, d_biases, d_emb)
