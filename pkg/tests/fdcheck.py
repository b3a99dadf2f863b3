"""Central finite-difference oracle shared by the gradient tests."""

import numpy as np

H = 1e-5
TOL = 1e-4


def numeric_grad(f, p, h=H):
    """Central differences of scalar ``f()`` wrt every entry of ``p`` (perturbed in place)."""
    g = np.zeros_like(p)
    flat, gflat = p.reshape(-1), g.reshape(-1)
    for k in range(flat.size):
        old = flat[k]
        flat[k] = old + h
        up = f()
        flat[k] = old - h
        down = f()
        flat[k] = old
        gflat[k] = (up - down) / (2 * h)
    return g


def noise_floor(loss, h=H, tol=TOL):
    """Gradient magnitude below which central differences are rounding noise.

    Subtracting two losses of size |L| loses about eps * |L| / h in the
    quotient; the factor 10 covers accumulation over the loss terms.
    Entries smaller than noise / tol are judged on absolute error instead.
    """
    return 10.0 * np.finfo(float).eps * max(abs(loss), 1.0) / h / tol


def max_rel_err(analytic, numeric, floor=0.0):
    a, n = np.asarray(analytic, dtype=float), np.asarray(numeric, dtype=float)
    if a.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), max(floor, 1e-300))
    return float(np.max(np.abs(a - n) / denom))
