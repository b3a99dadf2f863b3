"""Joint sentiment/social/profile embedding model for link-sign prediction.

Each enabled network has its own autoencoder. Per-user embeddings from
the networks are merged by an aggregation function and a pair of merged
embeddings is scored by a similarity function. Training minimises

    sentiment recon + lambda1 * social recon + lambda2 * profile recon
    + lambda3 * sum (f(e_i, e_j) - s_ij)^2 + lambda4 * (sum ||W||^2 + ||f||^2)

over mini-batches of sentiment links with AdaGrad. Reconstruction terms in
a batch cover the distinct users that appear in it, each row scaled so a
user's total reconstruction weight per epoch does not grow with degree.
"""

from __future__ import annotations

import json
import logging
import math
import struct
from dataclasses import asdict, dataclass, fields
from typing import Callable, NamedTuple

import numpy as np

from ._random import substream
from .autoencoder import (Autoencoder, LayerParams, backward, forward, init_autoencoder,
                          recon_residual)
from .errors import DataError, DivergenceError
from .graph import HeteroGraph

logger = logging.getLogger(__name__)

NETWORKS = ("sentiment", "social", "profile")
AGGREGATIONS = ("concatenation", "summation", "max_pooling")
SIMILARITIES = ("inner_product", "euclidean", "logistic_regression")
RECON_WEIGHTINGS = ("degree", "uniform")


@dataclass
class TrainConfig:
    """Hyperparameters, architecture and network switches (all JSON-serialisable)."""

    alpha: float = 10.0
    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 20.0
    lambda4: float = 0.01
    learning_rate: float = 0.05
    batch_size: int = 128
    max_epochs: int = 200
    convergence_tol: float = 1e-4
    adagrad_epsilon: float = 1e-8
    seed: int = 0
    hidden_dims: list | None = None
    embedding_dim: int | None = None
    activation: str = "tanh"
    similarity: str = "inner_product"
    aggregation: str = "concatenation"
    asymmetric: bool = False
    use_social: bool = True
    use_profile: bool = True
    recon_weighting: str = "degree"
    init_scale: float = 0.001

    def __post_init__(self):
        for name in ("alpha", "lambda1", "lambda2", "lambda3", "lambda4", "learning_rate",
                     "convergence_tol", "adagrad_epsilon", "init_scale"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if self.similarity not in SIMILARITIES:
            raise ValueError(f"similarity must be one of {SIMILARITIES}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
        if self.recon_weighting not in RECON_WEIGHTINGS:
            raise ValueError(f"recon_weighting must be one of {RECON_WEIGHTINGS}")
        if self.hidden_dims is not None:
            self.hidden_dims = [int(h) for h in self.hidden_dims]

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "TrainConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "TrainConfig":
        d = self.to_dict()
        d.update(changes)
        return TrainConfig(**d)


def layer_plan(config: TrainConfig, input_dim: int, sentiment_dim: int) -> list[int]:
    """Palindromic layer dims for one network.

    Without explicit sizes the 1000-hidden / 100-embedding default is
    scaled by min(1, sentiment_dim / 1000) for every network, so all
    embeddings share one width.
    """
    scale = min(1.0, sentiment_dim / 1000.0)
    emb = config.embedding_dim or max(1, int(round(100 * scale)))
    hidden = config.hidden_dims
    if hidden is None:
        hidden = [max(emb, int(round(1000 * scale)))]
    return [input_dim, *hidden, emb, *reversed(hidden), input_dim]


def adagrad_step(accumulator: np.ndarray, gradient: np.ndarray, learning_rate: float,
                 epsilon: float) -> np.ndarray:
    """Update ``accumulator`` in place and return the parameter delta."""
    if accumulator.shape != gradient.shape:
        raise ValueError(f"shape mismatch {accumulator.shape} vs {gradient.shape}")
    accumulator += gradient * gradient
    denom = np.sqrt(accumulator + epsilon)
    # denom is 0 only if epsilon == 0 and this entry never had a gradient
    delta = np.divide(gradient, denom, out=np.zeros_like(gradient), where=denom > 0)
    delta *= -learning_rate
    return delta


# ------------------------------------------------------------ aggregation


def aggregate(kind: str, parts: list[np.ndarray]) -> np.ndarray:
    if not parts:
        raise ValueError("no networks enabled")
    if kind == "concatenation":
        return np.concatenate(parts, axis=1) if len(parts) > 1 else parts[0]
    if len({p.shape for p in parts}) != 1:
        raise ValueError(f"{kind} needs equal embedding dims")
    if kind == "summation":
        out = parts[0].copy()
        for p in parts[1:]:
            out += p
        return out
    if kind == "max_pooling":
        return np.max(np.stack(parts), axis=0)
    raise ValueError(f"unknown aggregation {kind!r}")


def aggregate_backward(kind: str, parts: list[np.ndarray], grad: np.ndarray) -> list[np.ndarray]:
    if kind == "concatenation":
        splits = np.cumsum([p.shape[1] for p in parts])[:-1]
        return [np.ascontiguousarray(g) for g in np.split(grad, splits, axis=1)]
    if kind == "summation":
        return [grad] * len(parts)
    # max pooling routes the gradient to the first maximal operand
    winner = np.argmax(np.stack(parts), axis=0)
    return [np.where(winner == n, grad, 0.0) for n in range(len(parts))]


# ------------------------------------------------------------- similarity


def similarity_scores(kind: str, ei: np.ndarray, ej: np.ndarray, bias: float,
                      weight: np.ndarray | None = None) -> np.ndarray:
    """Raw pair scores for rows of ``ei`` against rows of ``ej``."""
    ei, ej = np.atleast_2d(ei), np.atleast_2d(ej)
    if ei.shape[1] != ej.shape[1]:
        raise ValueError("embedding dimension mismatch")
    if kind == "inner_product":
        return np.einsum("ij,ij->i", ei, ej) + bias
    if kind == "euclidean":
        return -np.sqrt(np.einsum("ij,ij->i", ei - ej, ei - ej)) + bias
    if kind == "logistic_regression":
        d = ei.shape[1]
        if weight is None or weight.shape != (2 * d,):
            raise ValueError("logistic regression weight must have length 2 * dim(e)")
        return ei @ weight[:d] + ej @ weight[d:] + bias
    raise ValueError(f"unknown similarity {kind!r}")


def similarity_backward(kind, ei, ej, weight, g):
    """Gradients of sum(g * score) wrt ei, ej, bias and weight."""
    db = float(g.sum())
    dw = None
    if kind == "inner_product":
        dei, dej = g[:, None] * ej, g[:, None] * ei
    elif kind == "euclidean":
        diff = ei - ej
        norm = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        coef = np.divide(-g, norm, out=np.zeros_like(norm), where=norm > 0)
        dei = coef[:, None] * diff
        dej = -dei
    else:
        d = ei.shape[1]
        dei = g[:, None] * weight[None, :d]
        dej = g[:, None] * weight[None, d:]
        dw = np.concatenate([g @ ei, g @ ej])
    return dei, dej, db, dw


# ------------------------------------------------------------------ model


class SignedHINModel:
    """Autoencoders, similarity parameters and AdaGrad state.

    In symmetric mode one set of autoencoders encodes both link ends; in
    asymmetric mode targets get their own set.
    """

    def __init__(self, config: TrainConfig, networks, encoders: dict, f_bias, f_weight=None,
                 node_ids=(), node_table_hash: str = ""):
        self.config = config
        self.networks = tuple(networks)
        self.encoders = encoders  # (side, network) -> Autoencoder
        self.f_bias = np.asarray(f_bias, dtype=np.float64).reshape(1)
        self.f_weight = None if f_weight is None else np.asarray(f_weight, dtype=np.float64)
        self.node_ids = tuple(node_ids)
        self.node_table_hash = node_table_hash
        self.accumulators = {name: np.zeros_like(p) for name, p in self.parameters().items()}
        self.history: list[float] = []
        self.cache: dict[str, np.ndarray] = {}

    @property
    def sides(self) -> tuple[str, ...]:
        return ("source", "target") if self.config.asymmetric else ("source",)

    def encoder(self, side: str, network: str) -> Autoencoder:
        if not self.config.asymmetric:
            side = "source"
        return self.encoders[(side, network)]

    def parameters(self) -> dict[str, np.ndarray]:
        """Trainable tensors by name; the arrays are the live parameters."""
        out = {}
        for side in self.sides:
            for net in self.networks:
                for k, layer in enumerate(self.encoders[(side, net)].layers, 1):
                    out[f"{side}.{net}.W{k}"] = layer.weight
                    out[f"{side}.{net}.b{k}"] = layer.bias
        out["f.b"] = self.f_bias
        if self.f_weight is not None:
            out["f.W"] = self.f_weight
        return out

    def weight_norm_sq(self) -> float:
        total = sum(float(np.sum(ae_w * ae_w)) for name, ae_w in self.parameters().items()
                    if ".W" in name and not name.startswith("f."))
        if self.f_weight is not None:
            total += float(self.f_weight @ self.f_weight)
        return total

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)


def enabled_networks(g: HeteroGraph, config: TrainConfig) -> list[str]:
    nets = ["sentiment"]
    if g.social is not None and config.use_social and config.lambda1 > 0:
        nets.append("social")
    if g.profile is not None and config.use_profile and config.lambda2 > 0 and g.profile.n_values:
        nets.append("profile")
    return nets


def init_model(g: HeteroGraph, config: TrainConfig) -> SignedHINModel:
    rng = substream(config.seed, "init")
    nets = enabled_networks(g, config)
    sent_dim = 2 * g.n_nodes
    input_dims = {"sentiment": sent_dim, "social": 2 * g.n_nodes,
                  "profile": g.profile.n_values if g.profile is not None else 0}
    sides = ("source", "target") if config.asymmetric else ("source",)
    encoders = {}
    for side in sides:
        for net in nets:
            dims = layer_plan(config, input_dims[net], sent_dim)
            encoders[(side, net)] = init_autoencoder(dims, config.activation, rng=rng,
                                                     scale=config.init_scale)
    emb_dims = [encoders[("source", n)].embedding_dim for n in nets]
    if config.aggregation != "concatenation" and len(set(emb_dims)) != 1:
        raise ValueError(f"{config.aggregation} needs equal embedding dims, got {emb_dims}")
    e_dim = sum(emb_dims) if config.aggregation == "concatenation" else emb_dims[0]
    f_weight = None
    if config.similarity == "logistic_regression":
        limit = math.sqrt(6.0 / (2 * e_dim + 1))
        f_weight = rng.uniform(-limit, limit, size=2 * e_dim)
    return SignedHINModel(config, nets, encoders, 0.0, f_weight, g.nodes, g.node_table_hash)


def _encode(model, g, side, users):
    """Forward every enabled network for ``users``; returns traces and merged embedding."""
    traces = []
    for net in model.networks:
        traces.append(forward(model.encoder(side, net), g.rows(net).take(users)))
    e = aggregate(model.config.aggregation, [t.embedding for t in traces])
    return traces, e


def embed_users(model: SignedHINModel, g: HeteroGraph, users, side: str = "source",
                chunk: int = 1024) -> np.ndarray:
    """Merged embeddings for ``users`` computed from ``g``'s adjacency rows."""
    _check_graph(model, g)
    users = np.asarray(users, dtype=np.int64)
    if users.size and (users.min() < 0 or users.max() >= g.n_nodes):
        raise IndexError("node index out of range")
    parts = [_encode(model, g, side, users[s:s + chunk])[1] for s in range(0, len(users), chunk)]
    if not parts:
        return np.zeros((0, model_embedding_dim(model)))
    return np.concatenate(parts, axis=0)


def embed_user(model: SignedHINModel, g: HeteroGraph, i: int, side: str = "source") -> np.ndarray:
    return embed_users(model, g, [i], side)[0]


def model_embedding_dim(model: SignedHINModel) -> int:
    dims = [model.encoder("source", n).embedding_dim for n in model.networks]
    return sum(dims) if model.config.aggregation == "concatenation" else dims[0]


def _check_graph(model, g):
    if model.node_table_hash and g.node_table_hash != model.node_table_hash:
        raise ValueError("graph node table does not match the model's training graph")


def similarity(model: SignedHINModel, ei, ej) -> np.ndarray:
    return similarity_scores(model.config.similarity, ei, ej, float(model.f_bias[0]),
                             model.f_weight)


def _recon_rows(model, g, side, users, pos):
    """Per-user reconstruction factor for one batch.

    "uniform" counts every distinct batch user once. "degree" gives each
    user (endpoint occurrences in the batch) / (training degree), so over
    one epoch every user's reconstruction is counted exactly once, as in
    the full-graph objective.
    """
    if model.config.recon_weighting == "uniform":
        return np.ones(len(users))
    counts = np.bincount(pos, minlength=len(users)).astype(np.float64)
    s = g.sentiment
    if not model.config.asymmetric:
        deg = np.bincount(np.r_[s.src, s.dst], minlength=g.n_nodes)
    elif side == "source":
        deg = np.bincount(s.src, minlength=g.n_nodes)
    else:
        deg = np.bincount(s.dst, minlength=g.n_nodes)
    return counts / np.maximum(deg[users], counts)


class Objective(NamedTuple):
    loss: float
    grads: dict
    parts: dict


def objective(model: SignedHINModel, g: HeteroGraph, batch, grad: bool = True) -> Objective:
    """Loss and exact gradients of the full objective on one link batch.

    With ``grad=False`` only the loss is computed and ``grads`` is empty.
    """
    batch = np.asarray(batch, dtype=np.int64).reshape(-1, 3)
    if len(batch) == 0:
        raise ValueError("empty batch")
    if not np.all(np.abs(batch[:, 2]) == 1):
        raise ValueError("batch links must have sign +1 or -1")
    cfg = model.config
    recon_scale = {"sentiment": 1.0, "social": cfg.lambda1, "profile": cfg.lambda2}
    src, dst, sign = batch[:, 0], batch[:, 1], batch[:, 2].astype(np.float64)

    if cfg.asymmetric:
        plan = [("source", src), ("target", dst)]
    else:
        plan = [("source", np.concatenate([src, dst]))]
    encoded = []
    for side, ends in plan:
        users, pos = np.unique(ends, return_inverse=True)
        traces, e = _encode(model, g, side, users)
        encoded.append((side, users, pos, traces, e, _recon_rows(model, g, side, users, pos)))
    if cfg.asymmetric:
        e_src = encoded[0][4][encoded[0][2]]
        e_dst = encoded[1][4][encoded[1][2]]
    else:
        pos = encoded[0][2]
        e_src = encoded[0][4][pos[:len(src)]]
        e_dst = encoded[0][4][pos[len(src):]]

    weight = model.f_weight
    pred = similarity_scores(cfg.similarity, e_src, e_dst, float(model.f_bias[0]), weight)
    resid = pred - sign
    supervised = cfg.lambda3 * float(resid @ resid)
    if not grad:
        parts = {"supervised": supervised, "sentiment": 0.0, "social": 0.0, "profile": 0.0}
        for side, users, pos, traces, e, row_w in encoded:
            for net, trace in zip(model.networks, traces):
                parts[net] += recon_residual(trace, cfg.alpha, recon_scale[net] * row_w)[0]
        parts["regularization"] = cfg.lambda4 * model.weight_norm_sq()
        return Objective(sum(parts.values()), {}, parts)
    d_src, d_dst, d_bias, d_weight = similarity_backward(
        cfg.similarity, e_src, e_dst, weight, 2.0 * cfg.lambda3 * resid)

    grads: dict = {}
    parts = {"supervised": supervised, "sentiment": 0.0, "social": 0.0, "profile": 0.0}
    for idx, (side, users, pos, traces, e, row_w) in enumerate(encoded):
        d_e = np.zeros_like(e)
        if cfg.asymmetric:
            np.add.at(d_e, pos, d_src if idx == 0 else d_dst)
        else:
            np.add.at(d_e, pos[:len(src)], d_src)
            np.add.at(d_e, pos[len(src):], d_dst)
        d_parts = aggregate_backward(cfg.aggregation, [t.embedding for t in traces], d_e)
        for net, trace, d_emb in zip(model.networks, traces, d_parts):
            ae = model.encoder(side, net)
            gr = backward(ae, trace, cfg.alpha, d_emb, scale=recon_scale[net] * row_w)
            parts[net] += gr.loss
            for k, (gw, gb) in enumerate(zip(gr.weights, gr.biases), 1):
                grads[f"{side}.{net}.W{k}"] = gw
                grads[f"{side}.{net}.b{k}"] = gb

    reg = 0.0
    for name, p in model.parameters().items():
        if ".W" in name and not name.startswith("f."):
            reg += float(np.sum(p * p))
            grads[name] = grads[name] + 2.0 * cfg.lambda4 * p
    grads["f.b"] = np.array([d_bias])
    if weight is not None:
        reg += float(weight @ weight)
        grads["f.W"] = d_weight + 2.0 * cfg.lambda4 * weight
    parts["regularization"] = cfg.lambda4 * reg
    loss = sum(parts.values())
    return Objective(loss, grads, parts)


# --------------------------------------------------------------- training


def train(g: HeteroGraph, config: TrainConfig,
          on_epoch: Callable[[int, float], None] | None = None) -> SignedHINModel:
    """AdaGrad over shuffled link mini-batches.

    Stops after ``max_epochs`` or once the relative change of the
    epoch-mean loss drops below ``convergence_tol``.
    """
    if len(g.sentiment) == 0 and config.max_epochs > 0:
        raise DataError("training needs at least one sentiment link")
    model = init_model(g, config)
    links = g.sentiment.links
    rng = substream(config.seed, "shuffle")
    params = model.parameters()
    bs = config.batch_size
    prev = None
    for epoch in range(config.max_epochs):
        order = rng.permutation(len(links))
        losses = []
        for step, start in enumerate(range(0, len(links), bs)):
            obj = objective(model, g, links[order[start:start + bs]])
            if not math.isfinite(obj.loss):
                raise DivergenceError(epoch, step, obj.loss)
            losses.append(obj.loss)
            for name, p in params.items():
                p += adagrad_step(model.accumulators[name], obj.grads[name],
                                  config.learning_rate, config.adagrad_epsilon)
        mean = float(np.mean(losses))
        model.history.append(mean)
        logger.debug("epoch %d mean loss %.6g", epoch, mean)
        if on_epoch is not None:
            on_epoch(epoch, mean)
        if prev is not None and abs(mean - prev) <= config.convergence_tol * abs(prev):
            break
        prev = mean
    refresh_cache(model, g)
    return model


def refresh_cache(model: SignedHINModel, g: HeteroGraph) -> None:
    """Store merged embeddings of every node so prediction needs no graph."""
    everyone = np.arange(g.n_nodes)
    model.cache = {"source": embed_users(model, g, everyone, "source")}
    if model.config.asymmetric:
        model.cache["target"] = embed_users(model, g, everyone, "target")


def node_embeddings(model: SignedHINModel, side: str, g: HeteroGraph | None = None) -> np.ndarray:
    if not model.config.asymmetric:
        side = "source"
    if g is not None:
        return embed_users(model, g, np.arange(g.n_nodes), side)
    if side not in model.cache:
        raise ValueError("model has no cached embeddings; pass the training graph")
    return model.cache[side]


# ------------------------------------------------------------- prediction


def pair_scores(model: SignedHINModel, pairs, g: HeteroGraph | None = None) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    n = model.n_nodes if g is None else g.n_nodes
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        raise IndexError("node index out of range")
    es = node_embeddings(model, "source", g)
    et = node_embeddings(model, "target", g)
    return similarity(model, es[pairs[:, 0]], et[pairs[:, 1]])


def sign_of(scores) -> np.ndarray:
    """Threshold raw scores at zero; exact zeros count as positive."""
    return np.where(np.asarray(scores) >= 0, 1, -1)


def predict_sign(model: SignedHINModel, g: HeteroGraph | None, i: int, j: int) -> tuple[int, float]:
    score = float(pair_scores(model, [(i, j)], g)[0])
    return int(sign_of(score)), score


class Recommendation(NamedTuple):
    nodes: list
    scores: list
    short: bool  # fewer candidates than requested


def rank_candidates(scores: np.ndarray, candidates: np.ndarray, k: int, polarity: str) -> np.ndarray:
    """Top-k candidates; ties go to the smaller node index."""
    if polarity == "positive":
        order = np.lexsort((candidates, -scores[candidates]))
    elif polarity == "negative":
        order = np.lexsort((candidates, scores[candidates]))
    else:
        raise ValueError("polarity must be 'positive' or 'negative'")
    return candidates[order[:k]]


def recommend(model: SignedHINModel, g: HeteroGraph | None, i: int, k: int,
              polarity: str = "positive", exclude_observed: bool = True,
              observed: HeteroGraph | None = None) -> Recommendation:
    """Rank every other node by its score from ``i``.

    Observed links come from ``g`` (or ``observed`` when ``g`` is None).
    """
    if k < 1:
        raise ValueError("K must be >= 1")
    n = model.n_nodes
    if not 0 <= i < n:
        raise IndexError("node index out of range")
    es = node_embeddings(model, "source", g)
    et = node_embeddings(model, "target", g)
    scores = similarity(model, np.repeat(es[i:i + 1], n, axis=0), et)
    mask = np.ones(n, dtype=bool)
    mask[i] = False
    if exclude_observed:
        ref = g if g is not None else observed
        if ref is None:
            raise ValueError("excluding observed links needs the training graph")
        s = ref.sentiment
        mask[s.dst[s.src == i]] = False
    top = rank_candidates(scores, np.flatnonzero(mask), k, polarity)
    return Recommendation(top.tolist(), scores[top].tolist(), len(top) < k)


# ---------------------------------------------------------- serialization

MAGIC = b"SLNKMDL\x00"
FORMAT_VERSION = 1


def _tensor_items(model: SignedHINModel):
    items = list(model.parameters().items())
    items += [(f"adagrad/{name}", acc) for name, acc in model.accumulators.items()]
    items += [(f"cache/{side}", arr) for side, arr in sorted(model.cache.items())]
    return items


def model_bytes(model: SignedHINModel) -> bytes:
    """Self-describing little-endian container; see ``save_model``."""
    manifest, blobs, offset = [], [], 0
    for name, arr in _tensor_items(model):
        raw = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(raw)
        offset += len(raw)
    header = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "networks": list(model.networks),
        "activation": model.config.activation,
        "aggregation": model.config.aggregation,
        "similarity": model.config.similarity,
        "layer_dims": {f"{s}.{n}": ae.layer_dims for (s, n), ae in sorted(model.encoders.items())},
        "node_table_hash": model.node_table_hash,
        "node_ids": list(model.node_ids),
        "history": model.history,
        "tensors": manifest,
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + struct.pack("<IQ", FORMAT_VERSION, len(head)) + head + b"".join(blobs)


def save_model(model: SignedHINModel, path) -> None:
    """Write ``MAGIC | u32 version | u64 header length | JSON header | float64 tensors``."""
    with open(path, "wb") as fh:
        fh.write(model_bytes(model))


def model_from_bytes(buf: bytes) -> SignedHINModel:
    if buf[:8] != MAGIC:
        raise DataError("not a model file")
    version, head_len = struct.unpack_from("<IQ", buf, 8)
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported model format version {version}")
    start = 8 + struct.calcsize("<IQ")
    header = json.loads(buf[start:start + head_len].decode("utf-8"))
    body = memoryview(buf)[start + head_len:]
    tensors = {}
    for t in header["tensors"]:
        count = int(np.prod(t["shape"], dtype=np.int64))
        arr = np.frombuffer(body, dtype="<f8", count=count, offset=t["offset"])
        tensors[t["name"]] = arr.astype(np.float64).reshape(t["shape"])
    config = TrainConfig.from_dict(header["config"])
    encoders = {}
    for key, dims in header["layer_dims"].items():
        side, net = key.split(".")
        layers = [LayerParams(tensors[f"{key}.W{k}"], tensors[f"{key}.b{k}"])
                  for k in range(1, len(dims))]
        encoders[(side, net)] = Autoencoder(layers, header["activation"])
    model = SignedHINModel(config, header["networks"], encoders, tensors["f.b"],
                           tensors.get("f.W"), header["node_ids"], header["node_table_hash"])
    for name in model.accumulators:
        model.accumulators[name] = tensors[f"adagrad/{name}"]
    model.history = list(header["history"])
    model.cache = {name.split("/", 1)[1]: arr for name, arr in tensors.items()
                   if name.startswith("cache/")}
    return model


def load_model(path) -> SignedHINModel:
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read())
