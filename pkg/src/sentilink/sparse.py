"""Minimal CSR row container used for adjacency vectors.

Only the handful of operations the autoencoders need: row gathering,
densification and per-row iteration. Column indices are kept sorted
within each row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SparseRows:
    indptr: np.ndarray   # int64, len n_rows + 1
    indices: np.ndarray  # int64, sorted within each row
    data: np.ndarray     # float64
    n_cols: int

    @property
    def n_rows(self) -> int:
        return len(self.indptr) - 1

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    @classmethod
    def from_triples(cls, rows, cols, vals, n_rows: int, n_cols: int) -> "SparseRows":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows):
            raise IndexError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= n_cols):
            raise IndexError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if dup.any():
                raise ValueError("duplicate (row, column) entry")
        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
        return cls(indptr, cols, vals, int(n_cols))

    @classmethod
    def from_dense(cls, dense) -> "SparseRows":
        dense = np.atleast_2d(np.asarray(dense, dtype=np.float64))
        r, c = np.nonzero(dense)
        return cls.from_triples(r, c, dense[r, c], dense.shape[0], dense.shape[1])

    def take(self, rows) -> "SparseRows":
        """Gather ``rows`` (in the given order) into a new container."""
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= self.n_rows):
            raise IndexError("row index out of range")
        starts = self.indptr[rows]
        lengths = self.indptr[rows + 1] - starts
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        np.cumsum(lengths, out=indptr[1:])
        total = int(indptr[-1])
        # position of every gathered entry in the source arrays
        offsets = np.arange(total, dtype=np.int64) - np.repeat(indptr[:-1], lengths)
        src = np.repeat(starts, lengths) + offsets
        return SparseRows(indptr, self.indices[src], self.data[src], self.n_cols)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def row_ids(self) -> np.ndarray:
        """Row index of each stored entry."""
        return np.repeat(np.arange(self.n_rows, dtype=np.int64), np.diff(self.indptr))

    def toarray(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        out[self.row_ids(), self.indices] = self.data
        return out
