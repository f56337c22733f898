"""Kernel tests against dense/loop oracles and finite differences."""

import numpy as np
import pytest

from kgalign.linalg import (
    SparseMatrix,
    identity_sparse,
    l2_normalize_rows,
    l2_normalize_rows_grad,
    normalize_adjacency,
    relu,
    relu_grad,
    sigmoid,
    sigmoid_grad,
    spmm,
    spmm_grad_dense,
)


def dense_normalized_adjacency(edges, n):
    """Oracle: literal D^-1/2 (A + I) D^-1/2 on dense arrays."""
    a = np.zeros((n, n))
    for i, j in edges:
        if i != j:
            a[i, j] = 1.0
            a[j, i] = 1.0
    a_tilde = a + np.eye(n)
    d = a_tilde.sum(axis=1)
    d_inv_sqrt = np.diag(1.0 / np.sqrt(d))
    return d_inv_sqrt @ a_tilde @ d_inv_sqrt


def random_edges(rng, n, m):
    return [(int(rng.integers(0, n)), int(rng.integers(0, n))) for _ in range(m)]


def central_diff(f, x, step=1e-4):
    grad = np.zeros_like(x, dtype=np.float64)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + step
        hi = f()
        x[idx] = orig - step
        lo = f()
        x[idx] = orig
        grad[idx] = (hi - lo) / (2 * step)
    return grad


def assert_grad_close(analytic, numeric, rtol=1e-4):
    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    assert np.max(np.abs(analytic - numeric) / denom) < rtol


class TestNormalizeAdjacency:
    def test_single_isolated_node(self):
        m = normalize_adjacency([], 1)
        np.testing.assert_array_equal(m.to_dense(), [[1.0]])

    def test_single_edge_pair(self):
        m = normalize_adjacency([(0, 1)], 2)
        np.testing.assert_array_equal(m.to_dense(), [[0.5, 0.5], [0.5, 0.5]])

    def test_rejects_empty_graph(self):
        with pytest.raises(ValueError):
            normalize_adjacency([], 0)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            normalize_adjacency([(0, 5)], 3)

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_dense_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 9))
        edges = random_edges(rng, n, int(rng.integers(0, 2 * n + 1)))
        got = normalize_adjacency(edges, n).to_dense()
        want = dense_normalized_adjacency(edges, n)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=0)

    def test_exactly_symmetric_bitwise(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(2, 12))
            edges = random_edges(rng, n, 3 * n)
            d = normalize_adjacency(edges, n).to_dense()
            assert np.array_equal(d, d.T)

    def test_diagonal_positive(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            n = int(rng.integers(1, 10))
            d = normalize_adjacency(random_edges(rng, n, n), n).to_dense()
            assert np.all(np.diag(d) > 0)

    def test_self_loops_in_input_collapse(self):
        # an explicit (i, i) edge must not double the self loop
        a = normalize_adjacency([(0, 0), (0, 1)], 2).to_dense()
        b = normalize_adjacency([(0, 1)], 2).to_dense()
        np.testing.assert_array_equal(a, b)


class TestSpmm:
    def test_identity(self):
        rng = np.random.default_rng(0)
        d = rng.normal(size=(5, 3))
        np.testing.assert_array_equal(spmm(identity_sparse(5), d), d)

    def test_zero_matrix(self):
        s = SparseMatrix(3, 3, np.zeros(4, dtype=np.int64), np.zeros(0, dtype=np.int64),
                         np.zeros(0))
        out = spmm(s, np.ones((3, 2)))
        np.testing.assert_array_equal(out, np.zeros((3, 2)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            spmm(identity_sparse(3), np.ones((4, 2)))

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_dense_oracle(self, seed):
        rng = np.random.default_rng(1000 + seed)
        n, m, k = (int(rng.integers(1, 9)) for _ in range(3))
        dense_s = np.where(rng.random((n, m)) < 0.4, rng.normal(size=(n, m)), 0.0)
        rows, cols = np.nonzero(dense_s)
        s = SparseMatrix.from_coo(n, m, rows, cols, dense_s[rows, cols])
        d = rng.normal(size=(m, k))
        got = spmm(s, d)
        want = dense_s @ d
        scale = max(1.0, np.abs(want).max())
        assert np.max(np.abs(got - want)) / scale < 1e-12

    def test_row_sums_against_dense(self):
        rng = np.random.default_rng(11)
        n = 6
        edges = random_edges(rng, n, 9)
        s = normalize_adjacency(edges, n)
        ones = np.ones((n, 1))
        want = dense_normalized_adjacency(edges, n).sum(axis=1, keepdims=True)
        np.testing.assert_allclose(spmm(s, ones), want, rtol=1e-12)

    def test_gradient_rule(self):
        rng = np.random.default_rng(5)
        dense_s = np.where(rng.random((4, 3)) < 0.6, rng.normal(size=(4, 3)), 0.0)
        rows, cols = np.nonzero(dense_s)
        s = SparseMatrix.from_coo(4, 3, rows, cols, dense_s[rows, cols])
        d = rng.normal(size=(3, 2))
        w = rng.normal(size=(4, 2))  # projection making the output a scalar

        analytic = spmm_grad_dense(s, w)
        numeric = central_diff(lambda: float(np.sum(spmm(s, d) * w)), d)
        assert_grad_close(analytic, numeric)


class TestElementwiseOps:
    def test_relu_values(self):
        np.testing.assert_array_equal(relu(np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 2.0])

    def test_sigmoid_at_zero(self):
        assert sigmoid(np.array([0.0]))[0] == 0.5

    def test_l2_normalize_345(self):
        np.testing.assert_allclose(l2_normalize_rows(np.array([[3.0, 4.0]])), [[0.6, 0.8]])

    def test_l2_normalize_zero_row_passthrough(self):
        x = np.array([[0.0, 0.0], [1.0, 1.0]])
        out = l2_normalize_rows(x)
        np.testing.assert_array_equal(out[0], [0.0, 0.0])
        np.testing.assert_allclose(np.linalg.norm(out[1]), 1.0)

    def test_relu_gradient(self):
        rng = np.random.default_rng(21)
        x = rng.normal(size=(4, 3))
        w = rng.normal(size=(4, 3))
        analytic = relu_grad(x, w)
        numeric = central_diff(lambda: float(np.sum(relu(x) * w)), x)
        assert_grad_close(analytic, numeric)

    def test_sigmoid_gradient(self):
        rng = np.random.default_rng(22)
        x = rng.normal(size=(4, 3))
        w = rng.normal(size=(4, 3))
        analytic = sigmoid_grad(sigmoid(x), w)
        numeric = central_diff(lambda: float(np.sum(sigmoid(x) * w)), x)
        assert_grad_close(analytic, numeric)

    def test_l2_normalize_gradient(self):
        rng = np.random.default_rng(23)
        x = rng.normal(size=(4, 3)) + 0.5  # keep rows away from zero
        w = rng.normal(size=(4, 3))
        analytic = l2_normalize_rows_grad(x, w)
        numeric = central_diff(lambda: float(np.sum(l2_normalize_rows(x) * w)), x)
        assert_grad_close(analytic, numeric)


class TestSparseMatrixInvariants:
    def test_from_coo_sums_duplicates(self):
        s = SparseMatrix.from_coo(2, 2, [0, 0, 1], [1, 1, 0], [2.0, 3.0, 1.0])
        np.testing.assert_array_equal(s.to_dense(), [[0.0, 5.0], [1.0, 0.0]])

    def test_rejects_bad_row_ptr(self):
        with pytest.raises(ValueError):
            SparseMatrix(2, 2, np.array([0, 2, 1]), np.array([0, 1]), np.array([1.0, 1.0]))

    def test_rejects_unsorted_columns(self):
        with pytest.raises(ValueError):
            SparseMatrix(1, 3, np.array([0, 2]), np.array([2, 1]), np.array([1.0, 1.0]))

    def test_rejects_out_of_range_column(self):
        with pytest.raises(ValueError):
            SparseMatrix(1, 2, np.array([0, 1]), np.array([5]), np.array([1.0]))
