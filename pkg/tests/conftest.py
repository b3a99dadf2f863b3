import numpy as np
import pytest

from sentilink.graph import build_graph
from sentilink.model import TrainConfig


@pytest.fixture
def tiny_graph():
    """Five users, all three networks, both signs present."""
    sentiment = {("a", "b"): 1, ("b", "c"): 1, ("c", "a"): -1, ("d", "a"): -1,
                 ("e", "b"): 1, ("a", "e"): -1, ("d", "c"): 1}
    social = [("a", "b"), ("b", "a"), ("c", "d"), ("e", "a")]
    profile = [("a", "city", "x"), ("b", "city", "y"), ("c", "city", "x"),
               ("d", "job", "p"), ("e", "city", "y"), ("e", "job", "q")]
    return build_graph(sentiment, social, profile, has_social=True)


@pytest.fixture
def small_config():
    return TrainConfig(hidden_dims=[6], embedding_dim=2, max_epochs=3, batch_size=4,
                       init_scale=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
