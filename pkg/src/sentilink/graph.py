"""Sentiment, social and profile networks over a shared user set.

Nodes get dense indices in first-seen order (sentiment file, then social,
then profile). Networks are stored as sorted edge arrays; the per-user
adjacency vectors fed to the autoencoders are built lazily as CSR rows.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._random import substream
from .errors import DataError
from .sparse import SparseRows

_SIGNS = {"+1": 1, "1": 1, "-1": -1}


def _sorted_unique_pairs(src, dst, n_nodes, what):
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if src.shape != dst.shape:
        raise ValueError(f"{what}: src/dst length mismatch")
    if src.size:
        if min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n_nodes:
            raise ValueError(f"{what}: node index out of range")
        if np.any(src == dst):
            raise ValueError(f"{what}: self-loop")
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    if src.size > 1 and np.any((src[1:] == src[:-1]) & (dst[1:] == dst[:-1])):
        raise ValueError(f"{what}: duplicate pair")
    return src, dst, order


@dataclass(frozen=True)
class SentimentNetwork:
    """Directed signed links; absent pairs mean an unobserved sentiment."""

    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    sign: np.ndarray

    def __post_init__(self):
        src, dst, order = _sorted_unique_pairs(self.src, self.dst, self.n_nodes, "sentiment")
        sign = np.asarray(self.sign, dtype=np.int64)[order]
        if sign.size and not np.all(np.abs(sign) == 1):
            raise ValueError("sentiment: signs must be +1 or -1")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        object.__setattr__(self, "sign", sign)

    def __len__(self) -> int:
        return len(self.src)

    @property
    def links(self) -> np.ndarray:
        """(n_links, 3) array of (src, dst, sign)."""
        return np.stack([self.src, self.dst, self.sign], axis=1)

    def subset(self, mask) -> "SentimentNetwork":
        mask = np.asarray(mask)
        return SentimentNetwork(self.n_nodes, self.src[mask], self.dst[mask], self.sign[mask])


@dataclass(frozen=True)
class SocialNetwork:
    """Directed follow links: (follower, followee)."""

    n_nodes: int
    src: np.ndarray
    dst: np.ndarray

    def __post_init__(self):
        src, dst, _ = _sorted_unique_pairs(self.src, self.dst, self.n_nodes, "social")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)

    def __len__(self) -> int:
        return len(self.src)


@dataclass(frozen=True)
class ProfileNetwork:
    """Bipartite user -> attribute-value links.

    ``vocabulary[j]`` is the (attribute, value) pair behind column j.
    """

    n_nodes: int
    user: np.ndarray
    value: np.ndarray
    vocabulary: tuple = ()
    single_valued: frozenset = frozenset()

    def __post_init__(self):
        user = np.asarray(self.user, dtype=np.int64)
        value = np.asarray(self.value, dtype=np.int64)
        n_values = len(self.vocabulary)
        if user.size:
            if user.min() < 0 or user.max() >= self.n_nodes:
                raise ValueError("profile: user index out of range")
            if value.min() < 0 or value.max() >= n_values:
                raise ValueError("profile: value index out of range")
        order = np.lexsort((value, user))
        user, value = user[order], value[order]
        if user.size > 1 and np.any((user[1:] == user[:-1]) & (value[1:] == value[:-1])):
            raise ValueError("profile: duplicate (user, value) link")
        if self.single_valued:
            seen = set()
            for u, v in zip(user.tolist(), value.tolist()):
                attr = self.vocabulary[v][0]
                if attr in self.single_valued:
                    if (u, attr) in seen:
                        raise ValueError(f"profile: user {u} has several values for {attr!r}")
                    seen.add((u, attr))
        object.__setattr__(self, "user", user)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "vocabulary", tuple(self.vocabulary))

    @property
    def n_values(self) -> int:
        return len(self.vocabulary)

    @property
    def schema(self) -> dict:
        """attribute -> list of its values, in column order."""
        out: dict = {}
        for attr, val in self.vocabulary:
            out.setdefault(attr, []).append(val)
        return out

    def __len__(self) -> int:
        return len(self.user)


@dataclass(frozen=True)
class AdjacencyVector:
    length: int
    positions: np.ndarray
    values: np.ndarray

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.length)
        out[self.positions] = self.values
        return out


@dataclass(frozen=True)
class HeteroGraph:
    nodes: tuple
    sentiment: SentimentNetwork
    social: SocialNetwork | None = None
    profile: ProfileNetwork | None = None
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(str(n) for n in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        index = {n: i for i, n in enumerate(nodes)}
        if len(index) != len(nodes):
            raise ValueError("duplicate external node id")
        object.__setattr__(self, "_index", index)
        for net in (self.sentiment, self.social, self.profile):
            if net is not None and net.n_nodes != len(nodes):
                raise ValueError("network size does not match the node table")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def index_of(self, external_id) -> int:
        try:
            return self._index[str(external_id)]
        except KeyError:
            raise KeyError(f"unknown node id {external_id!r}") from None

    @cached_property
    def node_table_hash(self) -> str:
        return hashlib.sha256("\n".join(self.nodes).encode("utf-8")).hexdigest()

    def with_sentiment(self, sentiment: SentimentNetwork) -> "HeteroGraph":
        return HeteroGraph(self.nodes, sentiment, self.social, self.profile)

    # adjacency rows, |V| x 2|V| (sentiment/social) or |V| x |U| (profile)

    @cached_property
    def sentiment_rows(self) -> SparseRows:
        s, n = self.sentiment, self.n_nodes
        return SparseRows.from_triples(
            np.r_[s.src, s.dst], np.r_[s.dst, n + s.src],
            np.r_[s.sign, s.sign].astype(np.float64), n, 2 * n)

    @cached_property
    def social_rows(self) -> SparseRows:
        if self.social is None:
            raise ValueError("graph has no social network")
        r, n = self.social, self.n_nodes
        return SparseRows.from_triples(
            np.r_[r.src, r.dst], np.r_[r.dst, n + r.src], np.ones(2 * len(r)), n, 2 * n)

    @cached_property
    def profile_rows(self) -> SparseRows:
        if self.profile is None:
            raise ValueError("graph has no profile network")
        p = self.profile
        return SparseRows.from_triples(p.user, p.value, np.ones(len(p)), self.n_nodes, p.n_values)

    def rows(self, network: str) -> SparseRows:
        return {"sentiment": lambda: self.sentiment_rows,
                "social": lambda: self.social_rows,
                "profile": lambda: self.profile_rows}[network]()


def _adjacency(rows: SparseRows, i: int) -> AdjacencyVector:
    if not 0 <= i < rows.n_rows:
        raise IndexError(f"node index {i} out of range")
    pos, val = rows.row(i)
    return AdjacencyVector(rows.n_cols, pos.copy(), val.copy())


def sentiment_adjacency(g: HeteroGraph, i: int) -> AdjacencyVector:
    """Outgoing signs in positions [0, |V|), incoming in [|V|, 2|V|)."""
    return _adjacency(g.sentiment_rows, i)


def social_adjacency(g: HeteroGraph, i: int) -> AdjacencyVector:
    return _adjacency(g.social_rows, i)


def profile_adjacency(g: HeteroGraph, i: int) -> AdjacencyVector:
    return _adjacency(g.profile_rows, i)


def aggregate_sentiment_triples(triples: Iterable) -> dict:
    """Collapse repeated (src, dst, ±1) triples to the sign of their sum.

    Pairs whose values cancel exactly are dropped.
    """
    totals: dict = defaultdict(int)
    for src, dst, value in triples:
        if value not in (1, -1):
            raise ValueError(f"sentiment value must be +1 or -1, got {value!r}")
        totals[(src, dst)] += value
    return {pair: (1 if t > 0 else -1) for pair, t in totals.items() if t != 0}


# ---------------------------------------------------------------- loading


class _NodeTable:
    def __init__(self):
        self.ids: list[str] = []
        self.index: dict[str, int] = {}

    def __call__(self, ext: str) -> int:
        i = self.index.get(ext)
        if i is None:
            i = self.index[ext] = len(self.ids)
            self.ids.append(ext)
        return i


def _records(path, n_fields):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != n_fields or any(p == "" for p in parts):
                raise DataError(f"{path}:{lineno}: expected {n_fields} tab-separated fields")
            yield lineno, parts


def read_sentiment_triples(path) -> list[tuple[str, str, int, int]]:
    """Parse a sentiment TSV into (src, dst, sign, line number) records."""
    out = []
    for lineno, (src, dst, sign) in _records(path, 3):
        if sign.strip() not in _SIGNS:
            raise DataError(f"{path}:{lineno}: sign must be +1 or -1, got {sign!r}")
        if src == dst:
            raise DataError(f"{path}:{lineno}: self-loop on {src!r}")
        out.append((src, dst, _SIGNS[sign.strip()], lineno))
    return out


def _collapse(records, path, aggregate):
    if aggregate:
        return aggregate_sentiment_triples((s, d, v) for s, d, v, _ in records)
    pairs: dict = {}
    for src, dst, value, lineno in records:
        prev = pairs.setdefault((src, dst), value)
        if prev != value:
            raise DataError(
                f"{path}:{lineno}: conflicting sign for pair ({src}, {dst}); "
                "pass aggregate=True to collapse by majority")
    return pairs


def build_graph(sentiment: dict, social: Sequence = (), profile: Sequence | None = None,
                *, has_social: bool | None = None, single_valued=()) -> HeteroGraph:
    """Assemble a graph from external-id records.

    ``sentiment`` maps (src, dst) -> ±1; ``social`` is a sequence of
    (follower, followee); ``profile`` a sequence of (user, attribute, value).
    """
    table = _NodeTable()
    s_src, s_dst, s_sign = [], [], []
    for (src, dst), sign in sentiment.items():
        s_src.append(table(str(src)))
        s_dst.append(table(str(dst)))
        s_sign.append(sign)
    r_pairs = []
    for a, b in social:
        if a == b:
            raise DataError(f"social self-loop on {a!r}")
        r_pairs.append((table(str(a)), table(str(b))))
    r_pairs = sorted(set(r_pairs))
    p_links, vocab = [], {}
    for user, attr, val in (profile or ()):
        key = (str(attr), str(val))
        col = vocab.setdefault(key, len(vocab))
        p_links.append((table(str(user)), col))
    p_links = sorted(set(p_links))

    n = len(table.ids)
    sent = SentimentNetwork(n, s_src, s_dst, s_sign)
    soc = None
    if has_social or (has_social is None and social):
        soc = SocialNetwork(n, [a for a, _ in r_pairs], [b for _, b in r_pairs])
    prof = None
    if profile is not None:
        try:
            prof = ProfileNetwork(n, [u for u, _ in p_links], [v for _, v in p_links],
                                  tuple(vocab), frozenset(single_valued))
        except ValueError as exc:
            raise DataError(str(exc)) from None
    return HeteroGraph(tuple(table.ids), sent, soc, prof)


def load_hetero_graph(sentiment_path, social_path=None, profile_path=None, *,
                      aggregate: bool = False, single_valued=()) -> HeteroGraph:
    """Load the TSV inputs into a validated graph.

    Users that appear only in the side files are appended to the node
    table with empty sentiment rows.
    """
    pairs = _collapse(read_sentiment_triples(sentiment_path), sentiment_path, aggregate)
    social = []
    if social_path is not None:
        for lineno, (a, b) in _records(social_path, 2):
            if a == b:
                raise DataError(f"{social_path}:{lineno}: self-loop on {a!r}")
            social.append((a, b))
    profile = None
    if profile_path is not None:
        profile = [tuple(parts) for _, parts in _records(profile_path, 3)]
    return build_graph(pairs, social, profile, has_social=social_path is not None,
                       single_valued=single_valued)


def write_node_table(g: HeteroGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, ext in enumerate(g.nodes):
            fh.write(f"{i}\t{ext}\n")


def write_sentiment_tsv(links, path, nodes: Sequence[str] | None = None) -> None:
    """Write (src, dst, sign) rows; indices are mapped through ``nodes`` if given."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for src, dst, sign in links:
            if nodes is not None:
                src, dst = nodes[int(src)], nodes[int(dst)]
            fh.write(f"{src}\t{dst}\t{'+1' if int(sign) > 0 else '-1'}\n")


def load_wiki_rfa(path) -> HeteroGraph:
    """Read the SNAP wiki-RfA dump (SRC:/TGT:/VOT: blocks) as a sentiment graph.

    Neutral votes and votes without a source are skipped; repeated
    (voter, candidate) pairs are collapsed by majority.
    """
    import gzip

    opener = gzip.open if str(path).endswith(".gz") else open
    triples, rec = [], {}

    def flush():
        src, dst, vote = rec.get("SRC", ""), rec.get("TGT", ""), rec.get("VOT", "")
        if src and dst and src != dst and vote in ("1", "-1"):
            triples.append((src, dst, int(vote)))
        rec.clear()

    with opener(path, "rt", encoding="utf-8", errors="replace") as fh:
        for line in fh:
            line = line.rstrip("\r\n")
            if not line:
                flush()
                continue
            key, _, value = line.partition(":")
            rec[key] = value.strip()
    flush()
    return build_graph(aggregate_sentiment_triples(triples))


# ---------------------------------------------------------------- splitting


def balance_links(links: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Downsample the majority sign so both signs have equal counts."""
    pos = np.flatnonzero(links[:, 2] > 0)
    neg = np.flatnonzero(links[:, 2] < 0)
    if len(pos) == 0 or len(neg) == 0:
        raise DataError("cannot balance: hidden links contain only one sign")
    m = min(len(pos), len(neg))
    keep = np.concatenate([rng.choice(pos, m, replace=False), rng.choice(neg, m, replace=False)])
    return links[np.sort(keep)]


def split_links(g: HeteroGraph, test_fraction: float, balanced: bool = True,
                seed: int = 0) -> tuple[HeteroGraph, np.ndarray]:
    """Hide a random fraction of sentiment links.

    Returns the training graph (social/profile untouched) and the test
    links as an (m, 3) array of (src, dst, sign).
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    n_links = len(g.sentiment)
    n_hidden = max(1, int(round(test_fraction * n_links)))
    if n_hidden >= n_links:
        raise DataError("not enough sentiment links to split")
    rng = substream(seed, "split")
    hidden = np.zeros(n_links, dtype=bool)
    hidden[rng.choice(n_links, n_hidden, replace=False)] = True
    test = g.sentiment.links[hidden]
    if balanced:
        test = balance_links(test, rng)
    return g.with_sentiment(g.sentiment.subset(~hidden)), test


def cold_start_split(g: HeteroGraph, test_fraction: float,
                     seed: int = 0) -> tuple[HeteroGraph, np.ndarray]:
    """Pick new users until their outgoing links reach ``test_fraction``.

    All outgoing links of the picked users become test links. Links
    pointing at them are removed from training as well, so the new users
    have zero sentiment degree in the training graph; their social and
    profile links stay.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    s = g.sentiment
    target = test_fraction * len(s)
    out_deg = np.bincount(s.src, minlength=g.n_nodes)
    rng = substream(seed, "cold_start")
    sources = rng.permutation(np.flatnonzero(out_deg))
    reached = np.cumsum(out_deg[sources])
    k = int(np.searchsorted(reached, target)) + 1
    if k > len(sources):
        raise DataError("cannot reach the target fraction without emptying training")
    new_users = np.zeros(g.n_nodes, dtype=bool)
    new_users[sources[:k]] = True
    is_test = new_users[s.src]
    touches = is_test | new_users[s.dst]
    if touches.all():
        raise DataError("cold-start split would leave no training links")
    return g.with_sentiment(s.subset(~touches)), s.links[is_test]


def subsample_links(g: HeteroGraph, fraction: float, seed: int = 0) -> HeteroGraph:
    """Keep a random ``fraction`` of the sentiment links (at least one)."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    n = len(g.sentiment)
    if fraction == 1 or n == 0:
        return g
    k = max(1, int(round(fraction * n)))
    rng = substream(seed, f"subsample:{fraction!r}")
    keep = np.zeros(n, dtype=bool)
    keep[rng.choice(n, k, replace=False)] = True
    return g.with_sentiment(g.sentiment.subset(keep))
