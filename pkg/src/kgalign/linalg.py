"""Sparse and dense kernels used by the alignment models.

All math is done in 64-bit floats.  There is no general autodiff graph:
each differentiable operation comes with a hand-written reverse-mode
companion (``*_grad``) and the models chain them explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit


@dataclass(frozen=True)
class SparseMatrix:
    """Compressed sparse row matrix with canonical (sorted, unique) columns."""

    rows: int
    cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        row_ptr = np.ascontiguousarray(self.row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(self.col_idx, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if row_ptr.shape != (self.rows + 1,):
            raise ValueError("row_ptr must have length rows + 1")
        if row_ptr[0] != 0 or np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must be non-decreasing and start at 0")
        nnz = int(row_ptr[-1])
        if col_idx.shape != (nnz,) or values.shape != (nnz,):
            raise ValueError("col_idx/values length must equal row_ptr[rows]")
        if nnz:
            if col_idx.min() < 0 or col_idx.max() >= self.cols:
                raise ValueError("column index out of range")
        if nnz > 1:
            # strictly increasing within each row: adjacent entries share a row
            # unless an interior row boundary sits between them
            same_row = np.ones(nnz - 1, dtype=bool)
            interior = row_ptr[1:-1]
            interior = interior[(interior > 0) & (interior < nnz)]
            same_row[interior - 1] = False
            if np.any(np.diff(col_idx)[same_row] <= 0):
                raise ValueError("col_idx must be strictly increasing within rows")
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "values", values)

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    @classmethod
    def from_coo(cls, rows: int, cols: int, r, c, v) -> "SparseMatrix":
        """Build from triplets; duplicate (r, c) entries are summed."""
        r = np.asarray(r, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        v = np.asarray(v, dtype=np.float64)
        if not (r.shape == c.shape == v.shape):
            raise ValueError("coo arrays must have equal length")
        if r.size:
            if r.min() < 0 or r.max() >= rows or c.min() < 0 or c.max() >= cols:
                raise ValueError("coo index out of range")
        m = sp.coo_matrix((v, (r, c)), shape=(rows, cols)).tocsr()
        m.sum_duplicates()
        m.sort_indices()
        return cls(rows, cols, m.indptr.astype(np.int64), m.indices.astype(np.int64), m.data)

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, self.col_idx, self.row_ptr), shape=(self.rows, self.cols))

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()


def identity_sparse(n: int) -> SparseMatrix:
    idx = np.arange(n, dtype=np.int64)
    return SparseMatrix(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))


def normalize_adjacency(edges, n: int) -> SparseMatrix:
    """Symmetric degree-normalized adjacency with self loops.

    ``edges`` is an iterable of (i, j) node pairs treated as undirected;
    duplicates and self loops collapse into the single unit self loop every
    node receives.  Entry (i, j) is 1/sqrt(d_i * d_j) where d counts the
    node's distinct neighbors plus itself.
    """
    if n <= 0:
        raise ValueError("node count must be positive")
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    e = e.reshape(-1, 2)
    if e.size:
        if e.min() < 0 or e.max() >= n:
            raise ValueError(f"edge endpoint out of range [0, {n})")
    e = e[e[:, 0] != e[:, 1]]
    # canonical undirected form, deduplicated
    und = np.sort(e, axis=1)
    und = np.unique(und, axis=0) if und.size else und.reshape(0, 2)

    deg = np.ones(n, dtype=np.int64)
    np.add.at(deg, und[:, 0], 1)
    np.add.at(deg, und[:, 1], 1)

    i, j = und[:, 0], und[:, 1]
    off = 1.0 / np.sqrt((deg[i] * deg[j]).astype(np.float64))
    rows = np.concatenate([np.arange(n, dtype=np.int64), i, j])
    cols = np.concatenate([np.arange(n, dtype=np.int64), j, i])
    vals = np.concatenate([1.0 / deg.astype(np.float64), off, off])
    return SparseMatrix.from_coo(n, n, rows, cols, vals)


def spmm(s: SparseMatrix, d: np.ndarray) -> np.ndarray:
    """Sparse-dense product S @ D."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or s.cols != d.shape[0]:
        raise ValueError(f"cannot multiply {s.rows}x{s.cols} by {d.shape}")
    return np.asarray(s.to_scipy() @ d)


def spmm_grad_dense(s: SparseMatrix, grad_out: np.ndarray) -> np.ndarray:
    """Gradient of spmm(s, d) with respect to the dense factor: S^T @ grad."""
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.ndim != 2 or grad_out.shape[0] != s.rows:
        raise ValueError("grad shape does not match product shape")
    return np.asarray(s.to_scipy().T @ grad_out)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_grad(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    # subgradient 0 at the kink
    return np.where(x > 0.0, grad_out, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    return expit(np.asarray(x, dtype=np.float64))


def sigmoid_grad(out: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    """Gradient given the forward output ``out = sigmoid(x)``."""
    return grad_out * out * (1.0 - out)


def row_norms(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=1))


def l2_normalize_rows(x: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm; all-zero rows pass through unchanged."""
    x = np.asarray(x, dtype=np.float64)
    norms = row_norms(x)
    safe = np.where(norms > 0.0, norms, 1.0)
    return x / safe[:, None]


def l2_normalize_rows_grad(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    norms = row_norms(x)
    safe = np.where(norms > 0.0, norms, 1.0)
    y = x / safe[:, None]
    dot = np.sum(grad_out * y, axis=1, keepdims=True)
    grad = (grad_out - dot * y) / safe[:, None]
    return np.where((norms > 0.0)[:, None], grad, grad_out)
