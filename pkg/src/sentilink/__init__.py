"""Signed link prediction from sentiment, social and profile networks."""

from .kernels import BACKEND as KERNEL_BACKEND
from .graph import (
    HeteroGraph,
    aggregate_sentiment_triples,
    cold_start_split,
    load_hetero_graph,
    split_links,
)
from .model import (
    SignedHINModel,
    TrainConfig,
    load_model,
    predict_sign,
    recommend,
    save_model,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "HeteroGraph",
    "SignedHINModel",
    "TrainConfig",
    "aggregate_sentiment_triples",
    "cold_start_split",
    "load_hetero_graph",
    "load_model",
    "predict_sign",
    "recommend",
    "save_model",
    "split_links",
    "train",
]
