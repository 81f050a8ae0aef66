"""Periodic uniform grids and sparse centered finite-difference operators.

The 2-D operators are Kronecker products of the 1-D periodic centered
stencil: Dx = (1/2dx) C_n (x) I_n and Dy = (1/2dy) I_n (x) C_n, where C_n
is the skew-symmetric circulant with +1 on the superdiagonal and -1 on the
subdiagonal (wrapping at the corners).  Fields live on an n-by-n node set;
the duplicate periodic nodes on the right/top edges are excluded, so the
total node count is N = n**2.  Node ordering runs bottom-to-top within
left-to-right columns: a field array W[i, j] = w(x_i, y_j) flattens to the
state vector with ``W.ravel()``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class GridError(ValueError):
    """Raised for invalid grid or stencil parameters."""


@dataclass(frozen=True)
class Grid:
    """Uniform doubly periodic grid on [a, b] x [c, d] with n points per axis."""

    n: int
    a: float = 0.0
    b: float = 1.0
    c: float = 0.0
    d: float = 1.0

    def __post_init__(self):
        if self.n < 3:
            raise GridError(f"need n >= 3 grid points per axis, got n={self.n}")
        if not (self.b > self.a and self.d > self.c):
            raise GridError("domain bounds must satisfy b > a and d > c")

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def dy(self) -> float:
        return (self.d - self.c) / self.n

    @property
    def N(self) -> int:
        return self.n * self.n

    def coords(self):
        """Meshgrid arrays X, Y of shape (n, n) with X[i, j] = a + i*dx."""
        x = self.a + np.arange(self.n) * self.dx
        y = self.c + np.arange(self.n) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    @classmethod
    def square(cls, n: int, length: float) -> "Grid":
        """Doubly periodic square [0, length]^2."""
        return cls(n, 0.0, float(length), 0.0, float(length))


def build_periodic_diff_1d(n: int, delta: float) -> sp.csr_matrix:
    """1-D periodic centered-difference matrix (1/2*delta) * C_n.

    C_n has +1 on the superdiagonal, -1 on the subdiagonal, C[0, n-1] = -1
    and C[n-1, 0] = +1, making it exactly skew-symmetric with zero row sums.
    """
    if n < 3:
        raise GridError(f"periodic centered stencil needs n >= 3, got {n}")
    if delta <= 0:
        raise GridError(f"mesh size must be positive, got {delta}")
    rows = np.concatenate([np.arange(n), np.arange(n)])
    cols = np.concatenate([(np.arange(n) + 1) % n, (np.arange(n) - 1) % n])
    vals = np.concatenate([np.ones(n), -np.ones(n)]) / (2.0 * delta)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


@dataclass(frozen=True)
class DiffOperators:
    """Sparse N x N partial-derivative operators on a periodic 2-D grid."""

    Dx: sp.csr_matrix
    Dy: sp.csr_matrix


def build_diff_2d(grid: Grid) -> DiffOperators:
    """Assemble Dx, Dy on the grid via Kronecker products of the 1-D stencil."""
    C = build_periodic_diff_1d(grid.n, 1.0)  # unscaled circulant / 2
    eye = sp.identity(grid.n, format="csr")
    # the 1-D builder already divides by 2*delta with delta=1, i.e. C = circ/2
    Dx = sp.kron(C, eye, format="csr") / grid.dx
    Dy = sp.kron(eye, C, format="csr") / grid.dy
    return DiffOperators(Dx=Dx, Dy=Dy)
