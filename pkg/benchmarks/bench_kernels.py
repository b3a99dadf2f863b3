"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--nodes 2000] [--hidden 100] [--batch 256] [--repeat 20]

Inputs mimic sentiment adjacency rows: width 2|V|, a few +-1 entries each.
"""

import argparse
import timeit

import numpy as np

from sentilink import kernels
from sentilink.sparse import SparseRows


def make_inputs(nodes, hidden, batch, degree, seed=0):
    rng = np.random.default_rng(seed)
    d = 2 * nodes
    rows = np.repeat(np.arange(batch), degree)
    cols = np.concatenate([rng.choice(d, degree, replace=False) for _ in range(batch)])
    vals = rng.choice([-1.0, 1.0], size=rows.size)
    x = SparseRows.from_triples(rows, cols, vals, batch, d)
    W = rng.normal(size=(hidden, d))
    dZ = rng.normal(size=(batch, hidden))
    A = np.tanh(rng.normal(size=(batch, d)))
    return x, W, dZ, A


def bench(mod, x, W, dZ, A, repeat):
    out = np.empty((x.n_rows, W.shape[0]))
    dW = np.zeros_like(W)
    R = np.empty_like(A)
    scale = np.ones(x.n_rows)
    calls = {
        "sparse_forward": lambda: mod.sparse_forward(x.indptr, x.indices, x.data, W, out),
        "sparse_weight_grad": lambda: mod.sparse_weight_grad(x.indptr, x.indices, x.data, dZ, dW),
        "weighted_residual": lambda: mod.weighted_residual(x.indptr, x.indices, x.data, A,
                                                           100.0, scale, R),
    }
    return {name: min(timeit.repeat(fn, number=1, repeat=repeat)) for name, fn in calls.items()}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=2000)
    ap.add_argument("--hidden", type=int, default=100)
    ap.add_argument("--batch", type=int, default=256)
    ap.add_argument("--degree", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    x, W, dZ, A = make_inputs(args.nodes, args.hidden, args.batch, args.degree)
    results = {"python": bench(kernels.backend_module("python"), x, W, dZ, A, args.repeat)}
    try:
        results["cython"] = bench(kernels.backend_module("cython"), x, W, dZ, A, args.repeat)
    except ImportError:
        print("compiled kernels not built; timing the fallback only")

    print(f"{'kernel':<20}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, t_py in results["python"].items():
        t_cy = results.get("cython", {}).get(name)
        cy = f"{t_cy * 1e3:12.3f}{t_py / t_cy:9.1f}x" if t_cy else f"{'-':>12}{'-':>10}"
        print(f"{name:<20}{t_py * 1e3:12.3f}{cy}")


if __name__ == "__main__":
    main()
