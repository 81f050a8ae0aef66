"""Shared reduced linear-quadratic model and its Kahan time stepper.

Both the intrusive Galerkin model and the learned (operator-inference)
model are sums of terms acting on the reduced state z = (h, u, v, s), each
sub-state of length r:

* quadratic terms: an r x r^2 block applied to kron(z_a, z_b),
* linear terms: an r x r matrix applied to z_j, optionally scaled by the
  Coriolis parameter f(mu) at evaluation time.

This module evaluates the right-hand side and its exact Jacobian for any
such term list and integrates the reduced system with the same linearly
implicit scheme as the full model (one dense solve per step).
"""

from dataclasses import dataclass, field

import numpy as np

from .fom import SolveError, coriolis

EQ_INDEX = {"h": 0, "u": 1, "v": 2, "s": 3}


@dataclass(frozen=True)
class QuadTerm:
    """Contribution ``block @ kron(z_a, z_b)`` to equation ``eq``."""

    eq: int
    block: np.ndarray  # (r, r*r)
    a: int             # index of the left Kronecker factor
    b: int             # index of the right Kronecker factor

    def tensor(self, r: int) -> np.ndarray:
        return self.block.reshape(r, r, r)


@dataclass(frozen=True)
class LinTerm:
    """Contribution ``matrix @ z_j`` to equation ``eq``; optionally f-scaled."""

    eq: int
    matrix: np.ndarray  # (r, r)
    j: int
    with_f: bool = False


@dataclass
class ReducedModel:
    """Reduced linear-quadratic dynamics in 4r coordinates."""

    r: int
    quad_terms: list = field(default_factory=list)
    lin_terms: list = field(default_factory=list)

    def _split(self, z: np.ndarray):
        r = self.r
        if z.shape != (4 * r,):
            raise ValueError(f"reduced state has shape {z.shape}, "
                             f"expected ({4 * r},)")
        return [z[i * r:(i + 1) * r] for i in range(4)]

    def coriolis_value(self, mu: float = None, f: float = None) -> float:
        if (mu is None) == (f is None):
            raise ValueError("specify exactly one of mu or f")
        return coriolis(mu) if f is None else f

    def rhs(self, z: np.ndarray, mu: float = None, f: float = None) -> np.ndarray:
        """Evaluate the reduced right-hand side at z."""
        fval = self.coriolis_value(mu, f)
        r = self.r
        parts = self._split(z)
        out = np.zeros(4 * r)
        for t in self.quad_terms:
            T = t.tensor(r)
            out[t.eq * r:(t.eq + 1) * r] += np.einsum(
                "ipq,p,q->i", T, parts[t.a], parts[t.b])
        for t in self.lin_terms:
            scale = fval if t.with_f else 1.0
            out[t.eq * r:(t.eq + 1) * r] += scale * (t.matrix @ parts[t.j])
        return out

    def jacobian(self, z: np.ndarray, mu: float = None,
                 f: float = None) -> np.ndarray:
        """Exact dense 4r x 4r Jacobian of :meth:`rhs` at z."""
        fval = self.coriolis_value(mu, f)
        r = self.r
        parts = self._split(z)
        J = np.zeros((4 * r, 4 * r))
        for t in self.quad_terms:
            T = t.tensor(r)
            rows = slice(t.eq * r, (t.eq + 1) * r)
            J[rows, t.a * r:(t.a + 1) * r] += np.einsum("ipq,q->ip", T, parts[t.b])
            J[rows, t.b * r:(t.b + 1) * r] += np.einsum("ipq,p->iq", T, parts[t.a])
        for t in self.lin_terms:
            scale = fval if t.with_f else 1.0
            J[t.eq * r:(t.eq + 1) * r, t.j * r:(t.j + 1) * r] += scale * t.matrix
        return J

    def step(self, z: np.ndarray, dt: float, mu: float = None,
             f: float = None) -> np.ndarray:
        """One linearly implicit step of the reduced system."""
        F = self.rhs(z, mu=mu, f=f)
        J = self.jacobian(z, mu=mu, f=f)
        A = np.eye(4 * self.r) - 0.5 * dt * J
        try:
            delta = np.linalg.solve(A, dt * F)
        except np.linalg.LinAlgError as exc:
            raise SolveError(f"reduced step system singular: {exc}") from exc
        return z + delta

    def simulate(self, z0: np.ndarray, dt: float, K: int, mu: float = None,
                 f: float = None) -> np.ndarray:
        """Integrate K steps; returns the (4r, K+1) reduced trajectory."""
        if K < 1:
            raise ValueError(f"need at least one step, got K={K}")
        fval = self.coriolis_value(mu, f)
        Z = np.empty((4 * self.r, K + 1))
        Z[:, 0] = z0
        for k in range(K):
            try:
                Z[:, k + 1] = self.step(Z[:, k], dt, f=fval)
            except SolveError as exc:
                raise SolveError(f"reduced step {k + 1}/{K} failed: {exc}") from exc
        return Z
