"""Entity-level sentiment extraction from pre-processed tweets.

Pipeline: emoticon weak labels -> PMI sentiment-orientation lexicon ->
SentiCircle score per (tweet, mentioned entity) -> thresholded signed
edges. Tokenization and dependency parsing happen upstream; a tweet
arrives as tokens, entity mentions and undirected dependency edges.
"""

from __future__ import annotations

import json
import math
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

POS, NEG, NONE = "pos", "neg", "none"


@dataclass(frozen=True)
class Tweet:
    id: str
    tokens: tuple
    mentions: tuple = ()  # (token_index, entity_id)
    deps: tuple = ()      # (token_index, token_index)
    user: str | None = None
    label: str | None = None

    def __post_init__(self):
        n = len(self.tokens)
        for idx, _ in self.mentions:
            if not 0 <= idx < n:
                raise DataError(f"tweet {self.id}: mention index {idx} out of range")
        for a, b in self.deps:
            if not (0 <= a < n and 0 <= b < n):
                raise DataError(f"tweet {self.id}: dependency edge ({a}, {b}) out of range")

    @property
    def author(self) -> str:
        return self.user if self.user is not None else self.id


def read_corpus(path) -> list[Tweet]:
    """JSON lines with keys id, tokens, mentions, deps (and optional user, label)."""
    tweets = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                tweets.append(Tweet(
                    id=str(rec["id"]),
                    tokens=tuple(str(t) for t in rec["tokens"]),
                    mentions=tuple((int(i), str(e)) for i, e in rec.get("mentions", [])),
                    deps=tuple((int(a), int(b)) for a, b in rec.get("deps", [])),
                    user=None if rec.get("user") is None else str(rec["user"]),
                    label=rec.get("label"),
                ))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad corpus record ({exc})") from None
    return tweets


def read_emoticon_map(path) -> dict[str, str]:
    emap: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in (POS, NEG):
                raise DataError(f"{path}:{lineno}: expected 'emoticon<TAB>pos|neg'")
            if emap.setdefault(parts[0], parts[1]) != parts[1]:
                raise DataError(f"{path}:{lineno}: emoticon {parts[0]!r} mapped to both classes")
    return emap


def weak_label(tweet: Tweet | Sequence[str], emoticons: Mapping[str, str]) -> str:
    """Class shared by every matched emoticon; "none" if none match or they disagree."""
    tokens = tweet.tokens if isinstance(tweet, Tweet) else tweet
    classes = {emoticons[t] for t in tokens if t in emoticons}
    return classes.pop() if len(classes) == 1 else NONE


def label_corpus(tweets: Iterable[Tweet], emoticons: Mapping[str, str]) -> list[Tweet]:
    return [replace(t, label=weak_label(t, emoticons)) for t in tweets]


# ---------------------------------------------------------------- lexicon


@dataclass
class Lexicon:
    scores: dict[str, float]
    metadata: dict = field(default_factory=dict)

    def __contains__(self, word) -> bool:
        return word in self.scores

    def __getitem__(self, word) -> float:
        return self.scores[word]

    def __len__(self) -> int:
        return len(self.scores)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(self.metadata, sort_keys=True) + "\n")
            for word in sorted(self.scores):
                fh.write(f"{word}\t{self.scores[word]!r}\n")

    @classmethod
    def load(cls, path) -> "Lexicon":
        with open(path, encoding="utf-8") as fh:
            try:
                metadata = json.loads(fh.readline())
            except ValueError:
                raise DataError(f"{path}: first line must be JSON metadata") from None
            scores = {}
            for lineno, line in enumerate(fh, 2):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                word, sep, value = line.rpartition("\t")
                if not sep:
                    raise DataError(f"{path}:{lineno}: expected 'word<TAB>score'")
                scores[word] = float(value)
        return cls(scores, metadata)


def pmi(joint: float, p_x: float, p_y: float) -> float:
    return math.log(joint / (p_x * p_y))


def build_lexicon(tweets: Sequence[Tweet], min_freq: int = 1, max_freq: int | None = None,
                  smoothing: float = 1.0, exclude: Iterable[str] = ()) -> Lexicon:
    """Sentiment-orientation score PMI(w, pos) - PMI(w, neg) per word.

    Probabilities are tweet-level (a tweet either contains a word or not)
    with ``smoothing`` pseudo-counts on every (word, class) cell. Only
    words whose raw occurrence count over all tweets lies in
    [min_freq, max_freq] are scored; ``exclude`` (typically the emoticons
    used for labelling) is skipped. Raw scores are divided by the largest
    absolute raw score.
    """
    if smoothing <= 0:
        raise ValueError("smoothing must be positive (zero counts make PMI infinite)")
    freq: Counter = Counter()
    in_class = {POS: Counter(), NEG: Counter()}
    n_class = {POS: 0, NEG: 0}
    for t in tweets:
        freq.update(t.tokens)
        if t.label in in_class:
            n_class[t.label] += 1
            in_class[t.label].update(set(t.tokens))
    if n_class[POS] == 0 or n_class[NEG] == 0:
        raise DataError("lexicon needs at least one positive and one negative tweet")

    k = float(smoothing)
    total = n_class[POS] + n_class[NEG] + 2 * k
    p_class = {c: (n_class[c] + k) / total for c in (POS, NEG)}
    skip = set(exclude)
    raw = {}
    for word, count in freq.items():
        if word in skip or count < min_freq or (max_freq is not None and count > max_freq):
            continue
        joint = {c: (in_class[c][word] + k) / total for c in (POS, NEG)}
        p_word = joint[POS] + joint[NEG]
        raw[word] = pmi(joint[POS], p_word, p_class[POS]) - pmi(joint[NEG], p_word, p_class[NEG])

    norm = max((abs(v) for v in raw.values()), default=0.0)
    scores = {w: (v / norm if norm > 0 else 0.0) for w, v in raw.items()}
    for w, v in scores.items():
        # guard the +-1 endpoints against rounding
        scores[w] = min(1.0, max(-1.0, v))
    metadata = {
        "probability_space": "tweet",
        "smoothing": k,
        "min_freq": min_freq,
        "max_freq": max_freq,
        "n_pos": n_class[POS],
        "n_neg": n_class[NEG],
        "n_tweets": len(tweets),
        "normalizer": norm,
    }
    return Lexicon(scores, metadata)


# ------------------------------------------------------------- SentiCircle


def dependency_distances(n_tokens: int, edges: Iterable, source: int) -> np.ndarray:
    """Hop distance from ``source`` over undirected edges; -1 where unreachable."""
    adj: list[list[int]] = [[] for _ in range(n_tokens)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    dist = np.full(n_tokens, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def senticircle_points(tweet: Tweet, mention_index: int, lexicon: Lexicon) -> np.ndarray:
    """(x, y) of every reachable lexicon term around the mentioned entity.

    Radius is the inverse dependency distance, angle SO * pi. Unreachable
    terms are left out rather than placed at the origin.
    """
    dist = dependency_distances(len(tweet.tokens), tweet.deps, mention_index)
    pts = []
    for pos, word in enumerate(tweet.tokens):
        if pos == mention_index or dist[pos] <= 0 or word not in lexicon:
            continue
        r, theta = 1.0 / dist[pos], lexicon[word] * math.pi
        pts.append((r * math.cos(theta), r * math.sin(theta)))
    return np.array(pts).reshape(-1, 2)


def senticircle_score(tweet: Tweet, mention, lexicon: Lexicon) -> float | None:
    """y-coordinate of the terms' geometric centre; None when no term is scorable."""
    idx = mention[0] if isinstance(mention, tuple) else int(mention)
    if not 0 <= idx < len(tweet.tokens):
        raise IndexError(f"mention index {idx} out of range")
    pts = senticircle_points(tweet, idx, lexicon)
    if len(pts) == 0:
        return None
    return float(pts[:, 1].mean())


def emit_signed_edges(tweets: Iterable[Tweet], lexicon: Lexicon,
                      threshold: float) -> list[tuple[str, str, int]]:
    """(author, entity, ±1) for every mention scoring at least ``threshold`` in magnitude."""
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    edges = []
    for t in tweets:
        for idx, entity in t.mentions:
            score = senticircle_score(t, (idx, entity), lexicon)
            if score is None or t.author == entity:
                continue
            if score >= threshold:
                edges.append((t.author, entity, 1))
            elif score <= -threshold:
                edges.append((t.author, entity, -1))
    return edges
