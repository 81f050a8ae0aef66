"""Minimum-norm least squares with drop tolerance and L-curve scanning.

The regression problems behind operator learning are rank-deficient or
nearly so; uniqueness is enforced by returning the minimizer of smallest
Frobenius norm, with the numerical rank fixed by an absolute drop
tolerance on the singular values (complete-orthogonal-decomposition
semantics).
"""

from dataclasses import dataclass

import numpy as np


def min_norm_lstsq(A: np.ndarray, B: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Minimum-Frobenius-norm minimizer X of ||A X - B||_F.

    Singular values of A at or below ``tol`` (absolute) are dropped; rank
    zero yields X = 0.
    """
    if tol < 0:
        raise ValueError(f"tolerance must be nonnegative, got {tol}")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    squeeze = B.ndim == 1
    B2 = B.reshape(-1, 1) if squeeze else B
    if A.shape[0] != B2.shape[0]:
        raise ValueError(f"row mismatch: A has {A.shape[0]}, B has {B2.shape[0]}")
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(S > tol))
    if rank == 0:
        X = np.zeros((A.shape[1], B2.shape[1]))
    else:
        X = Vt[:rank].T @ ((U[:, :rank].T @ B2) / S[:rank, None])
    return X.ravel() if squeeze else X


@dataclass
class LCurvePoint:
    tol: float
    residual: float   # ||A X - B||_F
    norm: float       # ||X||_F


@dataclass
class LCurve:
    """Tolerance sweep table plus a curvature-based corner suggestion."""

    points: list
    corner: int = None   # index into points, None if no suggestion

    @property
    def corner_tol(self):
        return None if self.corner is None else self.points[self.corner].tol

    def as_rows(self):
        return [(p.tol, p.residual, p.norm) for p in self.points]


def _menger_curvature(p1, p2, p3) -> float:
    """Curvature of the circle through three 2-D points."""
    a = np.hypot(*(p2 - p1))
    b = np.hypot(*(p3 - p2))
    c = np.hypot(*(p3 - p1))
    cross = (p2[0] - p1[0]) * (p3[1] - p1[1]) - (p2[1] - p1[1]) * (p3[0] - p1[0])
    denom = a * b * c
    return 0.0 if denom == 0 else 2.0 * abs(cross) / denom


def lcurve_scan(A: np.ndarray, B: np.ndarray, tol_grid) -> LCurve:
    """Solve the regression once per tolerance and locate the corner.

    The corner is the point of maximum discrete curvature of the log-log
    (residual, solution-norm) polyline; the table is always returned in
    full so the choice can be overridden.
    """
    tol_grid = np.asarray(sorted(tol_grid), dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    B2 = B.reshape(-1, 1) if B.ndim == 1 else B

    # one SVD serves the whole sweep
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    UtB = U.T @ B2
    points = []
    for tol in tol_grid:
        rank = int(np.sum(S > tol))
        if rank == 0:
            X = np.zeros((A.shape[1], B2.shape[1]))
        else:
            X = Vt[:rank].T @ (UtB[:rank] / S[:rank, None])
        points.append(LCurvePoint(
            tol=float(tol),
            residual=float(np.linalg.norm(A @ X - B2)),
            norm=float(np.linalg.norm(X))))

    corner = None
    if len(points) >= 3:
        tiny = np.finfo(float).tiny
        logpts = np.array([[np.log10(max(p.residual, tiny)),
                            np.log10(max(p.norm, tiny))] for p in points])
        curv = [_menger_curvature(logpts[i - 1], logpts[i], logpts[i + 1])
                for i in range(1, len(points) - 1)]
        if max(curv) > 0:
            corner = 1 + int(np.argmax(curv))
    return LCurve(points=points, corner=corner)
