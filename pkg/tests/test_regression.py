"""Minimum-norm least squares and L-curve scanning tests."""

import numpy as np
import pytest

from romswe.regression import lcurve_scan, min_norm_lstsq


def test_full_rank_matches_qr_oracle():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((30, 8))
    B = rng.standard_normal((30, 3))
    X = min_norm_lstsq(A, B)
    # dense QR oracle
    Q, R = np.linalg.qr(A)
    X_qr = np.linalg.solve(R, Q.T @ B)
    np.testing.assert_allclose(X, X_qr, atol=1e-10)


def test_residual_optimality():
    # no perturbation direction lowers the residual
    rng = np.random.default_rng(1)
    A = rng.standard_normal((20, 10))
    A[:, -1] = A[:, 0]  # exact rank deficiency
    b = rng.standard_normal(20)
    x = min_norm_lstsq(A, b, tol=1e-10)
    base = np.linalg.norm(A @ x - b)
    for _ in range(50):
        d = rng.standard_normal(10)
        d /= np.linalg.norm(d)
        assert np.linalg.norm(A @ (x + 1e-6 * d) - b) >= base - 1e-12


def test_norm_minimality_over_null_space():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((5, 12))  # wide: large null space
    b = rng.standard_normal(5)
    x = min_norm_lstsq(A, b)
    _, _, Vt = np.linalg.svd(A)
    null = Vt[5:]
    # x has no null-space component, so adding any increases the norm
    np.testing.assert_allclose(null @ x, 0.0, atol=1e-10)
    for row in null:
        assert np.linalg.norm(x + 1e-3 * row) > np.linalg.norm(x)


def test_drop_tolerance_reduces_rank():
    U, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((20, 3)))
    V, _ = np.linalg.qr(np.random.default_rng(4).standard_normal((6, 3)))
    A = U @ np.diag([1.0, 1e-3, 1e-9]) @ V.T
    b = A @ np.ones(6)
    x_keep = min_norm_lstsq(A, b, tol=1e-12)
    x_drop = min_norm_lstsq(A, b, tol=1e-6)
    # dropping the smallest singular value shrinks the solution norm
    assert np.linalg.norm(x_drop) < np.linalg.norm(x_keep)


def test_rank_zero_gives_zero():
    A = np.zeros((4, 3))
    b = np.ones(4)
    np.testing.assert_array_equal(min_norm_lstsq(A, b, tol=0.5), np.zeros(3))


def test_vector_rhs_shape():
    A = np.eye(3)
    b = np.arange(3.0)
    x = min_norm_lstsq(A, b)
    assert x.shape == (3,)
    np.testing.assert_allclose(x, b)


def test_input_validation():
    with pytest.raises(ValueError):
        min_norm_lstsq(np.eye(3), np.ones(4))
    with pytest.raises(ValueError):
        min_norm_lstsq(np.eye(3), np.ones(3), tol=-1.0)


def test_lcurve_monotone_tradeoff():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((40, 20))
    A[:, 10:] = A[:, :10] + 1e-6 * rng.standard_normal((40, 10))
    B = rng.standard_normal((40, 2))
    grid = [10.0 ** -e for e in range(12, 0, -1)]
    lc = lcurve_scan(A, B, grid)
    res = [p.residual for p in lc.points]
    nrm = [p.norm for p in lc.points]
    # increasing tolerance: residual grows, solution norm shrinks
    assert all(res[i] <= res[i + 1] + 1e-12 for i in range(len(res) - 1))
    assert all(nrm[i] >= nrm[i + 1] - 1e-12 for i in range(len(nrm) - 1))


def test_lcurve_matches_direct_solutions():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((15, 8))
    B = rng.standard_normal((15, 2))
    grid = [1e-8, 1e-4, 1e-1]
    lc = lcurve_scan(A, B, grid)
    for p in lc.points:
        X = min_norm_lstsq(A, B, tol=p.tol)
        assert p.residual == pytest.approx(np.linalg.norm(A @ X - B))
        assert p.norm == pytest.approx(np.linalg.norm(X))


def test_lcurve_corner_on_synthetic_elbow():
    # singular values split into a signal and a noise group; the corner
    # should fall between them
    rng = np.random.default_rng(7)
    U, _ = np.linalg.qr(rng.standard_normal((50, 10)))
    V, _ = np.linalg.qr(rng.standard_normal((10, 10)))
    S = np.array([100, 80, 60, 40, 20, 1e-6, 8e-7, 5e-7, 2e-7, 1e-7])
    A = U @ np.diag(S) @ V.T
    B = A @ rng.standard_normal((10, 1)) + 1e-5 * rng.standard_normal((50, 1))
    grid = [10.0 ** -e for e in range(12, 0, -1)]
    lc = lcurve_scan(A, B, grid)
    assert lc.corner is not None
    assert 1e-7 < lc.corner_tol < 20.0


def test_lcurve_short_table_no_corner():
    A = np.eye(2)
    B = np.ones((2, 1))
    lc = lcurve_scan(A, B, [1e-3, 1e-1])
    assert lc.corner is None
    assert len(lc.as_rows()) == 2
