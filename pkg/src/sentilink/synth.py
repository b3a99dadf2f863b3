"""Planted-community signed graphs with social and profile side networks.

Sentiment links inside a community are positive and links across
communities negative, each flipped with probability ``noise``. Social
follows stay inside the follower's community with probability
``social_homophily``; a single profile attribute reveals the community
with probability ``profile_informativeness``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ._random import substream
from .graph import HeteroGraph, build_graph


@dataclass(frozen=True)
class SyntheticSpec:
    n_nodes: int = 200
    n_communities: int = 2
    intra_positive_prob: float = 0.05
    inter_negative_prob: float = 0.05
    social_homophily: float = 0.9
    social_degree: int = 10
    profile_informativeness: float = 0.9
    noise: float = 0.05
    seed: int = 0

    def __post_init__(self):
        for name in ("intra_positive_prob", "inter_negative_prob", "social_homophily",
                     "profile_informativeness", "noise"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.n_nodes < 2 or self.n_communities < 1 or self.n_communities > self.n_nodes:
            raise ValueError("need n_nodes >= 2 and 1 <= n_communities <= n_nodes")
        if self.social_degree < 0:
            raise ValueError("social_degree must be >= 0")


@dataclass
class SyntheticData:
    spec: SyntheticSpec
    communities: np.ndarray  # community of node "u<k>" at position k
    sentiment: dict          # (src, dst) -> ±1, external ids
    social: list
    profile: list

    def graph(self) -> HeteroGraph:
        return build_graph(self.sentiment, self.social, self.profile, has_social=True)

    def community_of(self, g: HeteroGraph) -> np.ndarray:
        """Community labels aligned with ``g``'s node indices."""
        return np.array([self.communities[int(ext[1:])] for ext in g.nodes])


def node_name(k: int) -> str:
    return f"u{k}"


def generate(spec: SyntheticSpec) -> SyntheticData:
    n, c = spec.n_nodes, spec.n_communities
    rng = substream(spec.seed, "synth")
    comm = rng.permutation(np.arange(n) % c)

    sentiment = {}
    for i in range(n):
        same = comm == comm[i]
        prob = np.where(same, spec.intra_positive_prob, spec.inter_negative_prob)
        prob[i] = 0.0
        hit = rng.random(n) < prob
        flip = rng.random(n) < spec.noise
        sign = np.where(same, 1, -1) * np.where(flip, -1, 1)
        for j in np.flatnonzero(hit):
            sentiment[(node_name(i), node_name(int(j)))] = int(sign[j])

    members = [np.flatnonzero(comm == k) for k in range(c)]
    outsiders = [np.flatnonzero(comm != k) for k in range(c)]
    social = set()
    for i in range(n):
        for _ in range(spec.social_degree):
            own = rng.random() < spec.social_homophily or len(outsiders[comm[i]]) == 0
            pool = members[comm[i]] if own else outsiders[comm[i]]
            j = int(pool[rng.integers(len(pool))])
            if j != i:
                social.add((node_name(i), node_name(j)))

    profile = []
    for i in range(n):
        value = comm[i]
        if c > 1 and rng.random() >= spec.profile_informativeness:
            others = [k for k in range(c) if k != comm[i]]
            value = others[rng.integers(len(others))]
        profile.append((node_name(i), "community", str(value)))

    return SyntheticData(spec, comm, sentiment, sorted(social), profile)


def write_synthetic(data: SyntheticData, out_dir) -> dict:
    """Write sentiment/social/profile TSVs and the ground-truth table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / f"{name}.tsv" for name in ("sentiment", "social", "profile", "truth")}
    with open(paths["sentiment"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# src\tdst\tsign\n")
        for (a, b), s in data.sentiment.items():
            fh.write(f"{a}\t{b}\t{'+1' if s > 0 else '-1'}\n")
    with open(paths["social"], "w", encoding="utf-8", newline="\n") as fh:
        for a, b in data.social:
            fh.write(f"{a}\t{b}\n")
    with open(paths["profile"], "w", encoding="utf-8", newline="\n") as fh:
        for u, attr, val in data.profile:
            fh.write(f"{u}\t{attr}\t{val}\n")
    with open(paths["truth"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + json.dumps(asdict(data.spec), sort_keys=True) + "\n")
        for k, comm in enumerate(data.communities):
            fh.write(f"{node_name(k)}\t{int(comm)}\n")
    return paths
