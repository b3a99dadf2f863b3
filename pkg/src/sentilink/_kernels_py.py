"""Numpy reference versions of the sparse-layer kernels.

Used when the compiled extension is unavailable or disabled through
``SENTILINK_PURE_PYTHON=1``. Every function writes into caller-provided
output arrays, like its compiled twin.
"""

import numpy as np


def _row_ids(indptr):
    return np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))


def sparse_forward(indptr, indices, data, W, out):
    """out[r] = sum_p data[p] * W[:, indices[p]] over the entries of row r."""
    out[...] = 0.0
    if len(indices) == 0:
        return
    contrib = W[:, indices].T * data[:, None]
    nonempty = np.flatnonzero(np.diff(indptr))
    out[nonempty] = np.add.reduceat(contrib, indptr[nonempty], axis=0)


def sparse_weight_grad(indptr, indices, data, dZ, dW):
    """dW += dZ.T @ X for CSR input X."""
    if len(indices) == 0:
        return
    contrib = dZ[_row_ids(indptr)] * data[:, None]
    order = np.argsort(indices, kind="stable")
    cols = indices[order]
    starts = np.flatnonzero(np.r_[True, cols[1:] != cols[:-1]])
    dW[:, cols[starts]] += np.add.reduceat(contrib[order], starts, axis=0).T


def weighted_residual(indptr, indices, data, A, alpha_sq, row_scale, R):
    """Weighted squared reconstruction error against a CSR target.

    Positions stored in the target get weight ``alpha_sq``, all others 1;
    row r of the loss is multiplied by ``row_scale[r]``. Fills ``R`` with
    the gradient wrt ``A`` and returns the total loss.
    """
    rows = _row_ids(indptr)
    a = A[rows, indices]
    diff = a - data
    row_loss = np.einsum("ij,ij->i", A, A)
    np.add.at(row_loss, rows, alpha_sq * diff * diff - a * a)
    np.multiply(A, 2.0 * row_scale[:, None], out=R)
    R[rows, indices] = 2.0 * row_scale[rows] * alpha_sq * diff
    return float(row_scale @ row_loss)
