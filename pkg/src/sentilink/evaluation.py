"""Link-sign prediction and node recommendation experiments."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ._random import substream
from .graph import (HeteroGraph, balance_links, cold_start_split, split_links,
                    subsample_links)
from .model import (SignedHINModel, TrainConfig, node_embeddings, pair_scores,
                    rank_candidates, sign_of, similarity, train)


def _check_pair(preds, labels):
    preds, labels = np.asarray(preds), np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValueError("preds and labels must have equal length")
    if preds.size == 0:
        raise ValueError("empty input")
    return preds, labels


def accuracy(preds, labels) -> float:
    preds, labels = _check_pair(preds, labels)
    return int(np.sum(preds == labels)) / preds.size


def _counts(preds, labels, cls):
    tp = int(np.sum((preds == cls) & (labels == cls)))
    fp = int(np.sum((preds == cls) & (labels != cls)))
    fn = int(np.sum((preds != cls) & (labels == cls)))
    return tp, fp, fn


def _f1(tp, fp, fn) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def micro_f1(preds, labels, classes=(1, -1)) -> float:
    """F1 from TP/FP/FN pooled over both classes."""
    preds, labels = _check_pair(preds, labels)
    tp = fp = fn = 0
    for c in classes:
        a, b, d = _counts(preds, labels, c)
        tp, fp, fn = tp + a, fp + b, fn + d
    return _f1(tp, fp, fn)


def class_f1(preds, labels, cls) -> float:
    preds, labels = _check_pair(preds, labels)
    return _f1(*_counts(preds, labels, cls))


def sign_metrics(preds, labels, prefix: str = "") -> dict:
    f1_pos, f1_neg = class_f1(preds, labels, 1), class_f1(preds, labels, -1)
    return {
        f"{prefix}accuracy": accuracy(preds, labels),
        f"{prefix}micro_f1": micro_f1(preds, labels),
        f"{prefix}f1_positive": f1_pos,
        f"{prefix}f1_negative": f1_neg,
        f"{prefix}macro_f1": (f1_pos + f1_neg) / 2,
    }


def precision_recall_at_k(ranked: Sequence, relevant, k: int) -> tuple[float, float]:
    if k < 1:
        raise ValueError("K must be >= 1")
    relevant = set(relevant)
    if not relevant:
        raise ValueError("empty relevant set")
    hits = len(set(list(ranked)[:k]) & relevant)
    return hits / k, hits / len(relevant)


# ----------------------------------------------------------------- reports


@dataclass
class EvalReport:
    task: str
    split: str
    setting: dict
    metrics: dict
    seed: int
    config_fingerprint: str
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def config_fingerprint(config: TrainConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def reports_json(reports: Sequence[EvalReport]) -> str:
    return json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2, sort_keys=True) + "\n"


def reports_tsv(reports: Sequence[EvalReport]) -> str:
    """One row per report; columns are the union of settings and metrics."""
    setting_keys = sorted({k for r in reports for k in r.setting})
    metric_keys = sorted({k for r in reports for k in r.metrics})
    lines = ["\t".join(["task", "split", *setting_keys, *metric_keys])]
    for r in reports:
        cells = [r.task, r.split]
        cells += [repr(r.setting.get(k, "")) for k in setting_keys]
        cells += [repr(r.metrics[k]) if k in r.metrics else "" for k in metric_keys]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def save_reports(reports: Sequence[EvalReport], json_path, tsv_path=None) -> None:
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(reports_json(reports))
    if tsv_path is not None:
        with open(tsv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(reports_tsv(reports))


# ------------------------------------------------------------ link signs


def _predict(model: SignedHINModel, links: np.ndarray) -> np.ndarray:
    return sign_of(pair_scores(model, links[:, :2]))


def run_link_prediction(g: HeteroGraph, config: TrainConfig, split: str = "standard",
                        training_fractions: Sequence[float] = (1.0,), test_fraction: float = 0.2,
                        seed: int = 0) -> list[EvalReport]:
    """Hide a balanced test set once, then train on growing fractions of the rest.

    The cold-start split takes new users' links as the test set and also
    hides an ordinary balanced test set among the remaining users, so
    metrics are reported for new users and for all users.
    """
    config = config.replace(seed=seed)
    fp = config_fingerprint(config)
    meta: dict = {"test_fraction": test_fraction}
    if split == "standard":
        train_g, test = split_links(g, test_fraction, balanced=True, seed=seed)
        new_test = None
    elif split == "cold_start":
        base_g, new_test = cold_start_split(g, test_fraction, seed=seed)
        new_test = balance_links(new_test, substream(seed, "cold_balance"))
        train_g, test = split_links(base_g, test_fraction, balanced=True, seed=seed)
        meta["n_new_users"] = int(len(np.unique(new_test[:, 0])))
        meta["n_new_user_test_links"] = int(len(new_test))
    else:
        raise ValueError("split must be 'standard' or 'cold_start'")
    meta["n_test_links"] = int(len(test))
    meta["constant_positive_accuracy"] = accuracy(np.ones(len(test), dtype=np.int64), test[:, 2])

    reports = []
    for frac in training_fractions:
        sub = subsample_links(train_g, frac, seed=seed)
        model = train(sub, config)
        preds = _predict(model, test)
        if new_test is None:
            metrics = sign_metrics(preds, test[:, 2])
        else:
            new_preds = _predict(model, new_test)
            metrics = sign_metrics(np.r_[preds, new_preds], np.r_[test[:, 2], new_test[:, 2]])
            metrics.update(sign_metrics(new_preds, new_test[:, 2], prefix="new_users_"))
            metrics.update(sign_metrics(preds, test[:, 2], prefix="old_users_"))
        info = dict(meta, n_train_links=int(len(sub.sentiment)), epochs=len(model.history))
        reports.append(EvalReport("link_prediction", split, {"train_fraction": float(frac)},
                                  metrics, seed, fp, info))
    return reports


# ----------------------------------------------------------- recommendation


def score_rows(model: SignedHINModel, users: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Score matrix of ``users`` (rows) against every node (columns)."""
    es = node_embeddings(model, "source")
    et = node_embeddings(model, "target")
    n = et.shape[0]
    out = np.empty((len(users), n))
    for start in range(0, len(users), chunk):
        block = users[start:start + chunk]
        if model.config.similarity == "inner_product":
            out[start:start + len(block)] = es[block] @ et.T + float(model.f_bias[0])
            continue
        for r, u in enumerate(block):
            out[start + r] = similarity(model, np.repeat(es[u:u + 1], n, axis=0), et)
    return out


def recommendation_metrics(model: SignedHINModel, train_g: HeteroGraph, hidden: np.ndarray,
                           k_values: Sequence[int]) -> tuple[dict, dict]:
    """Mean precision/recall@K per polarity over users with held-out targets.

    Candidates exclude the user and every target the user already rated in
    training. A random-ranking baseline is reported through its analytic
    expectation (K / |candidates| of the relevant set is retrieved).
    """
    n = train_g.n_nodes
    users = np.unique(hidden[:, 0])
    scores = score_rows(model, users)
    s = train_g.sentiment
    sums: dict = {}
    evaluable = {"positive": 0, "negative": 0}
    for row, u in enumerate(users):
        mask = np.ones(n, dtype=bool)
        mask[u] = False
        mask[s.dst[s.src == u]] = False
        cand = np.flatnonzero(mask)
        mine = hidden[hidden[:, 0] == u]
        for polarity, sign in (("positive", 1), ("negative", -1)):
            relevant = set(mine[mine[:, 2] == sign, 1].tolist())
            if not relevant:
                continue
            evaluable[polarity] += 1
            ranked = rank_candidates(scores[row], cand, max(k_values), polarity).tolist()
            reachable = len(relevant & set(cand.tolist()))
            for k in k_values:
                p, r = precision_recall_at_k(ranked, relevant, k)
                frac = min(k, len(cand)) / len(cand)
                for name, value in ((f"{polarity}_precision@{k}", p),
                                    (f"{polarity}_recall@{k}", r),
                                    (f"random_{polarity}_precision@{k}",
                                     frac * reachable / k),
                                    (f"random_{polarity}_recall@{k}",
                                     frac * reachable / len(relevant))):
                    sums[name] = sums.get(name, 0.0) + value
    metrics = {}
    for name, total in sums.items():
        polarity = name.split("_")[1] if name.startswith("random_") else name.split("_")[0]
        metrics[name] = total / evaluable[polarity]
    meta = {"evaluable_users_positive": evaluable["positive"],
            "evaluable_users_negative": evaluable["negative"],
            "skipped_users_positive": int(len(users) - evaluable["positive"]),
            "skipped_users_negative": int(len(users) - evaluable["negative"])}
    return metrics, meta


def run_node_recommendation(g: HeteroGraph, config: TrainConfig, k_values: Sequence[int],
                            test_fraction: float = 0.2, seed: int = 0) -> list[EvalReport]:
    config = config.replace(seed=seed)
    train_g, hidden = split_links(g, test_fraction, balanced=False, seed=seed)
    model = train(train_g, config)
    metrics, meta = recommendation_metrics(model, train_g, hidden, k_values)
    meta.update(n_hidden_links=int(len(hidden)), epochs=len(model.history))
    fp = config_fingerprint(config)
    reports = []
    for k in k_values:
        suffix = f"@{k}"
        mine = {name[:-len(suffix)]: v for name, v in metrics.items() if name.endswith(suffix)}
        reports.append(EvalReport("node_recommendation", "standard", {"K": int(k)},
                                  mine, seed, fp, dict(meta)))
    return reports


# --------------------------------------------------------- external scores


def read_score_file(path, g: HeteroGraph) -> dict:
    """``i<TAB>j<TAB>score`` with external ids -> {(i, j): score}."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise ValueError(f"{path}:{lineno}: expected 'i<TAB>j<TAB>score'")
            out[(g.index_of(parts[0]), g.index_of(parts[1]))] = float(parts[2])
    return out


def external_link_metrics(test: np.ndarray, scores: dict) -> dict:
    """Sign metrics for scores produced by another method on our test links."""
    missing = [(int(i), int(j)) for i, j, _ in test if (int(i), int(j)) not in scores]
    if missing:
        raise ValueError(f"{len(missing)} test pairs have no score, e.g. {missing[0]}")
    raw = np.array([scores[(int(i), int(j))] for i, j, _ in test])
    return sign_metrics(sign_of(raw), test[:, 2])


def degree_baseline_scores(train_g: HeteroGraph, links: np.ndarray) -> np.ndarray:
    """Positive minus negative in-degree of each link's target in training."""
    s = train_g.sentiment
    n = train_g.n_nodes
    pos = np.bincount(s.dst[s.sign > 0], minlength=n)
    neg = np.bincount(s.dst[s.sign < 0], minlength=n)
    return (pos - neg)[links[:, 1]].astype(np.float64)
