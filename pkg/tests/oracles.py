"""Independent reference computations for the sentiment-extraction tests."""

import math

import numpy as np


def so_oracle(n_pos_w, n_neg_w, n_pos, n_neg, k=1.0):
    """PMI(w,pos) - PMI(w,neg) with tweet-level add-k counts; the word marginal cancels."""
    return math.log((n_pos_w + k) / (n_pos + k)) - math.log((n_neg_w + k) / (n_neg + k))


def floyd_warshall(n, edges):
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for a, b in edges:
        if a != b:
            d[a, b] = d[b, a] = 1
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


def brute_score(tokens, edges, m, lex):
    """Mean y of (cos, sin)(SO * pi) / d over every reachable lexicon term."""
    d = floyd_warshall(len(tokens), edges)
    ys = [math.sin(lex[w] * math.pi) / d[m, p] for p, w in enumerate(tokens)
          if p != m and w in lex and np.isfinite(d[m, p]) and d[m, p] > 0]
    return sum(ys) / len(ys) if ys else None


def random_senticircle_cases(seed, count, max_tokens=20):
    """(tokens, edges, mention index, lexicon dict) instances."""
    rng = np.random.default_rng(seed)
    vocab = [f"w{k}" for k in range(12)]
    lex = {w: float(rng.uniform(-1, 1)) for w in vocab[:8]}
    for _ in range(count):
        n = int(rng.integers(2, max_tokens + 1))
        tokens = tuple(rng.choice(vocab, n).tolist())
        edges = {tuple(sorted(rng.choice(n, 2, replace=False).tolist()))
                 for _ in range(int(rng.integers(0, 2 * n)))}
        yield tokens, tuple(sorted(edges)), int(rng.integers(n)), lex
