import itertools
import json
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdcheck import max_rel_err, noise_floor, numeric_grad
from sentilink.autoencoder import forward, recon_weights, weighted_recon_loss
from sentilink.errors import DataError, DivergenceError
from sentilink.model import (AGGREGATIONS, SIMILARITIES, TrainConfig, adagrad_step, aggregate,
                             aggregate_backward, enabled_networks, init_model, layer_plan,
                             load_model, model_bytes, model_from_bytes, objective, pair_scores,
                             predict_sign, rank_candidates, recommend, save_model, sign_of,
                             similarity_scores, train)
from sentilink.synth import SyntheticSpec, generate


def test_defaults_follow_published_settings():
    c = TrainConfig()
    assert (c.alpha, c.lambda1, c.lambda2, c.lambda3, c.lambda4) == (10.0, 1.0, 1.0, 20.0, 0.01)
    assert c.similarity == "inner_product" and c.aggregation == "concatenation"
    assert c.activation == "tanh" and not c.asymmetric


def test_config_validation_and_json(tmp_path):
    with pytest.raises(ValueError, match="unknown"):
        TrainConfig.from_dict({"alpah": 3})
    for bad in ({"alpha": 0.5}, {"lambda3": -1}, {"similarity": "cosine"}, {"batch_size": 0}):
        with pytest.raises(ValueError):
            TrainConfig(**bad)
    c = TrainConfig(hidden_dims=[8], seed=4)
    p = tmp_path / "c.json"
    p.write_text(json.dumps(c.to_dict()))
    assert TrainConfig.from_json(p) == c
    assert c.replace(seed=5).seed == 5 and c.seed == 4


def test_layer_plan_scaling():
    c = TrainConfig()
    assert layer_plan(c, 10, 10) == [10, 10, 1, 10, 10]
    assert layer_plan(c, 4000, 4000) == [4000, 1000, 100, 1000, 4000]
    assert layer_plan(c, 3, 400) == [3, 400, 40, 400, 3]
    c = TrainConfig(hidden_dims=[100], embedding_dim=32)
    assert layer_plan(c, 400, 400) == [400, 100, 32, 100, 400]


def test_adagrad_examples():
    acc = np.zeros(1)
    d = adagrad_step(acc, np.array([2.0]), 0.1, 0.0)
    assert acc[0] == 4.0 and d[0] == pytest.approx(-0.1)
    acc = np.array([3.0])
    assert adagrad_step(acc, np.zeros(1), 0.1, 0.0)[0] == 0.0 and acc[0] == 3.0
    acc = np.zeros(1)
    assert adagrad_step(acc, np.ones(1), 1.0, 0.0)[0] == pytest.approx(-1.0)
    assert adagrad_step(acc, np.ones(1), 1.0, 0.0)[0] == pytest.approx(-1 / np.sqrt(2))
    # untouched entry with epsilon 0 stays finite
    assert adagrad_step(np.zeros(2), np.array([0.0, 1.0]), 1.0, 0.0).tolist() == [0.0, -1.0]


def test_aggregation_examples():
    x, y, z = np.array([[1.0, 2]]), np.array([[3.0, 4]]), np.array([[5.0, 6]])
    assert aggregate("concatenation", [x, y, z]).tolist() == [[1, 2, 3, 4, 5, 6]]
    assert aggregate("summation", [x, y, z]).tolist() == [[9, 12]]
    pooled = aggregate("max_pooling", [np.array([[1.0, 4]]), np.array([[3.0, 2]]), np.zeros((1, 2))])
    assert pooled.tolist() == [[3, 4]]
    with pytest.raises(ValueError):
        aggregate("summation", [x, np.zeros((1, 3))])


def test_max_pooling_tie_goes_to_first():
    parts = [np.array([[1.0, 0.0]]), np.array([[1.0, 2.0]])]
    g = aggregate_backward("max_pooling", parts, np.array([[5.0, 7.0]]))
    assert g[0].tolist() == [[5.0, 0.0]] and g[1].tolist() == [[0.0, 7.0]]


def test_similarity_examples():
    assert similarity_scores("inner_product", [1, 2], [3, -1], 0.0)[0] == 1.0
    assert similarity_scores("euclidean", [0.3, 4], [0.3, 4], 0.0)[0] == 0.0
    w = np.array([1.0, 0, 0, 1])
    assert similarity_scores("logistic_regression", [2, 5], [7, 3], -1.0, w)[0] == 4.0
    assert similarity_scores("euclidean", [0, 0], [3, 4], 1.0)[0] == -4.0


@pytest.mark.parametrize("score, sign", [(3.2, 1), (-0.01, -1), (0.0, 1), (-0.0, 1)])
def test_sign_rule(score, sign):
    assert sign_of(score) == sign


def test_enabled_networks(tiny_graph):
    assert enabled_networks(tiny_graph, TrainConfig()) == ["sentiment", "social", "profile"]
    assert enabled_networks(tiny_graph, TrainConfig(lambda1=0)) == ["sentiment", "profile"]
    assert enabled_networks(tiny_graph, TrainConfig(use_profile=False)) == ["sentiment", "social"]


def _perturbed(model, rng):
    model.f_bias[:] = rng.normal(size=1)
    return model


@pytest.mark.parametrize("simf, agg", list(itertools.product(SIMILARITIES, AGGREGATIONS)))
@pytest.mark.parametrize("asym", [False, True])
def test_objective_gradient(tiny_graph, simf, agg, asym):
    rng = np.random.default_rng(zlib.crc32(f"{simf}/{agg}/{asym}".encode()))
    cfg = TrainConfig(hidden_dims=[4], embedding_dim=2, similarity=simf, aggregation=agg,
                      asymmetric=asym, init_scale=1.0, seed=3)
    m = _perturbed(init_model(tiny_graph, cfg), rng)
    batch = tiny_graph.sentiment.links[[0, 2, 3, 5]]
    obj = objective(m, tiny_graph, batch)
    assert objective(m, tiny_graph, batch, grad=False).loss == pytest.approx(obj.loss, rel=1e-12)
    floor = noise_floor(obj.loss)
    for name, p in m.parameters().items():
        num = numeric_grad(lambda: objective(m, tiny_graph, batch, grad=False).loss, p)
        assert max_rel_err(obj.grads[name], num, floor) < 1e-4, name


def test_objective_terms_against_direct_computation(tiny_graph):
    """Full-batch loss rebuilt by hand from per-user forward passes."""
    cfg = TrainConfig(hidden_dims=[4], embedding_dim=2, init_scale=1.0, lambda4=0.3,
                      lambda1=0.7, lambda2=1.9)
    m = _perturbed(init_model(tiny_graph, cfg), np.random.default_rng(0))
    links = tiny_graph.sentiment.links
    obj = objective(m, tiny_graph, links)

    n = tiny_graph.n_nodes
    deg = np.bincount(np.r_[links[:, 0], links[:, 1]], minlength=n)
    active = np.flatnonzero(deg)
    emb = {}
    expected = {"sentiment": 0.0, "social": 0.0, "profile": 0.0}
    for net, lam in (("sentiment", 1.0), ("social", 0.7), ("profile", 1.9)):
        X = tiny_graph.rows(net).toarray()
        ae = m.encoder("source", net)
        for u in range(n):
            t = forward(ae, X[u])
            emb.setdefault(u, []).append(t.embedding[0])
            if u in active:  # every user touched by a link is reconstructed once
                w = recon_weights(X[u], cfg.alpha)
                expected[net] += lam * weighted_recon_loss(X[u], t.reconstruction[0], w)
    e = {u: np.concatenate(v) for u, v in emb.items()}
    sup = sum((e[i] @ e[j] + m.f_bias[0] - s) ** 2 for i, j, s in links.tolist())
    reg = sum(float(np.sum(W * W)) for name, W in m.parameters().items() if ".W" in name)
    for net in expected:
        assert obj.parts[net] == pytest.approx(expected[net], rel=1e-10)
    assert obj.parts["supervised"] == pytest.approx(cfg.lambda3 * sup, rel=1e-10)
    assert obj.parts["regularization"] == pytest.approx(0.3 * reg, rel=1e-10)


def test_uniform_weighting_counts_batch_users_once(tiny_graph):
    cfg = TrainConfig(hidden_dims=[4], embedding_dim=2, recon_weighting="uniform", init_scale=1.0)
    m = init_model(tiny_graph, cfg)
    link = tiny_graph.sentiment.links[:1]
    X = tiny_graph.rows("sentiment").toarray()
    ae = m.encoder("source", "sentiment")
    expected = sum(weighted_recon_loss(X[u], forward(ae, X[u]).reconstruction[0],
                                       recon_weights(X[u], cfg.alpha)) for u in link[0, :2])
    assert objective(m, tiny_graph, link).parts["sentiment"] == pytest.approx(expected, rel=1e-12)


def test_lambda3_zero_leaves_only_regularization_on_f(tiny_graph):
    cfg = TrainConfig(hidden_dims=[4], embedding_dim=2, lambda3=0, similarity="logistic_regression",
                      init_scale=1.0)
    m = init_model(tiny_graph, cfg)
    obj = objective(m, tiny_graph, tiny_graph.sentiment.links)
    assert obj.grads["f.b"][0] == 0.0
    np.testing.assert_allclose(obj.grads["f.W"], 2 * cfg.lambda4 * m.f_weight, rtol=1e-15)
    before = obj.loss
    m.f_bias[:] = 5.0
    assert objective(m, tiny_graph, tiny_graph.sentiment.links).loss == before


def test_symmetry_bitwise(tiny_graph, small_config):
    m = train(tiny_graph, small_config)
    n = tiny_graph.n_nodes
    pairs = np.array([(i, j) for i in range(n) for j in range(n) if i != j])
    np.testing.assert_array_equal(pair_scores(m, pairs), pair_scores(m, pairs[:, ::-1]))


def test_asymmetric_has_two_encoder_sets(tiny_graph, small_config):
    m = train(tiny_graph, small_config.replace(asymmetric=True))
    assert {s for s, _ in m.encoders} == {"source", "target"}
    assert "target.sentiment.W1" in m.parameters()


@pytest.fixture(scope="module")
def synth_graph():
    return generate(SyntheticSpec(n_nodes=60, seed=2, intra_positive_prob=0.15,
                                  inter_negative_prob=0.15)).graph()


def test_training_descends(synth_graph):
    cfg = TrainConfig(hidden_dims=[20], embedding_dim=8, max_epochs=15, convergence_tol=0)
    m = train(synth_graph, cfg)
    assert len(m.history) == 15
    assert m.history[-1] < m.history[0]


def test_zero_epochs_is_initial_model(tiny_graph, small_config):
    cfg = small_config.replace(max_epochs=0)
    m = train(tiny_graph, cfg)
    ref = init_model(tiny_graph, cfg)
    assert m.history == []
    for name, p in ref.parameters().items():
        np.testing.assert_array_equal(m.parameters()[name], p)


def test_training_deterministic(synth_graph):
    cfg = TrainConfig(hidden_dims=[10], embedding_dim=4, max_epochs=4)
    assert model_bytes(train(synth_graph, cfg)) == model_bytes(train(synth_graph, cfg))
    assert model_bytes(train(synth_graph, cfg)) != model_bytes(train(synth_graph, cfg.replace(seed=1)))


def test_divergence_raises(tiny_graph):
    cfg = TrainConfig(hidden_dims=[4], embedding_dim=2, learning_rate=1e200, max_epochs=5,
                      batch_size=2, init_scale=1.0)
    with np.errstate(all="ignore"), pytest.raises(DivergenceError) as info:
        train(tiny_graph, cfg)
    assert info.value.epoch >= 0


def test_training_needs_links(tiny_graph):
    empty = tiny_graph.with_sentiment(tiny_graph.sentiment.subset(np.zeros(7, dtype=bool)))
    with pytest.raises(DataError):
        train(empty, TrainConfig(max_epochs=1))


def test_serialization_roundtrip(tmp_path, tiny_graph, small_config):
    for cfg in (small_config, small_config.replace(asymmetric=True, similarity="logistic_regression",
                                                    aggregation="summation")):
        m = train(tiny_graph, cfg)
        path = tmp_path / "m.bin"
        save_model(m, path)
        back = load_model(path)
        assert model_bytes(back) == path.read_bytes()
        pairs = tiny_graph.sentiment.links[:, :2]
        np.testing.assert_array_equal(pair_scores(back, pairs), pair_scores(m, pairs))
        np.testing.assert_array_equal(pair_scores(back, pairs, tiny_graph), pair_scores(m, pairs))
        assert back.node_ids == tiny_graph.nodes and back.history == m.history


def test_bad_model_files(tiny_graph, small_config):
    buf = model_bytes(train(tiny_graph, small_config))
    with pytest.raises(DataError):
        model_from_bytes(b"NOTAMODEL" + buf[9:])
    bumped = bytearray(buf)
    bumped[8] = 99
    with pytest.raises(DataError, match="version"):
        model_from_bytes(bytes(bumped))


def test_wrong_graph_rejected(tiny_graph, small_config):
    from sentilink.graph import HeteroGraph

    m = train(tiny_graph, small_config)
    shuffled = HeteroGraph(tiny_graph.nodes[::-1], tiny_graph.sentiment)
    with pytest.raises(ValueError):
        pair_scores(m, [(0, 1)], shuffled)


def test_predict_sign(tiny_graph, small_config):
    m = train(tiny_graph, small_config)
    sign, score = predict_sign(m, None, 0, 1)
    assert sign == (1 if score >= 0 else -1)
    with pytest.raises(IndexError):
        predict_sign(m, None, 0, 99)


def test_rank_examples():
    scores = np.array([0.0, 2.0, -1.0, 0.5])
    cand = np.array([1, 2, 3])
    assert rank_candidates(scores, cand, 2, "positive").tolist() == [1, 3]
    assert rank_candidates(scores, cand, 2, "negative").tolist() == [2, 3]
    assert rank_candidates(scores, cand, 10, "positive").tolist() == [1, 3, 2]
    tied = np.array([1.0, 1.0, 1.0])
    assert rank_candidates(tied, np.array([2, 0, 1]), 3, "negative").tolist() == [0, 1, 2]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=20), st.integers(1, 25))
def test_rank_is_sorted(values, k):
    scores = np.array(values)
    cand = np.arange(len(values))
    top = rank_candidates(scores, cand, k, "positive")
    assert len(top) == min(k, len(values))
    assert np.all(np.diff(scores[top]) <= 0)
    rest = np.setdiff1d(cand, top)
    if rest.size:
        assert scores[top].min() >= scores[rest].max()


def test_recommend_excludes_and_flags_short(tiny_graph, small_config):
    m = train(tiny_graph, small_config)
    a = tiny_graph.index_of("a")
    rated = set(tiny_graph.sentiment.dst[tiny_graph.sentiment.src == a].tolist())
    rec = recommend(m, tiny_graph, a, 10)
    assert rec.short and a not in rec.nodes and not rated & set(rec.nodes)
    assert len(rec.nodes) == tiny_graph.n_nodes - 1 - len(rated)
    full = recommend(m, None, a, 10, exclude_observed=False)
    assert len(full.nodes) == tiny_graph.n_nodes - 1
    with pytest.raises(ValueError):
        recommend(m, None, a, 3)
    with pytest.raises(ValueError):
        recommend(m, tiny_graph, a, 0)
