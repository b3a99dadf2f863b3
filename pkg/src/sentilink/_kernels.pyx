# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for sparse-input autoencoder layers.

Same contracts as ``_kernels_py``; see that module for the reference
implementations.
"""

import numpy as np


def sparse_forward(const long long[::1] indptr, const long long[::1] indices,
                   const double[::1] data, const double[:, ::1] W,
                   double[:, ::1] out):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t h = W.shape[0]
    cdef Py_ssize_t r, k, p
    cdef double acc
    cdef const double* wk
    with nogil:
        for k in range(h):
            wk = &W[k, 0]
            for r in range(n):
                acc = 0.0
                for p in range(indptr[r], indptr[r + 1]):
                    acc = acc + data[p] * wk[indices[p]]
                out[r, k] = acc


def sparse_weight_grad(const long long[::1] indptr, const long long[::1] indices,
                       const double[::1] data, const double[:, ::1] dZ,
                       double[:, ::1] dW):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t h = dZ.shape[1]
    cdef Py_ssize_t r, k, p
    cdef double d
    cdef double* gk
    with nogil:
        for k in range(h):
            gk = &dW[k, 0]
            for r in range(n):
                d = dZ[r, k]
                if d == 0.0:
                    continue
                for p in range(indptr[r], indptr[r + 1]):
                    gk[indices[p]] = gk[indices[p]] + d * data[p]


def weighted_residual(const long long[::1] indptr, const long long[::1] indices,
                      const double[::1] data, const double[:, ::1] A,
                      double alpha_sq, const double[::1] row_scale, double[:, ::1] R):
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t d = A.shape[1]
    cdef Py_ssize_t r, j, p
    cdef double a, diff, row_loss, scale, total = 0.0
    with nogil:
        for r in range(n):
            scale = row_scale[r]
            row_loss = 0.0
            for j in range(d):
                a = A[r, j]
                row_loss = row_loss + a * a
                R[r, j] = 2.0 * scale * a
            for p in range(indptr[r], indptr[r + 1]):
                j = indices[p]
                a = A[r, j]
                diff = a - data[p]
                row_loss = row_loss + alpha_sq * diff * diff - a * a
                R[r, j] = 2.0 * scale * alpha_sq * diff
            total = total + scale * row_loss
    return total
