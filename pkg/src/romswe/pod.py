"""POD bases per state field, deterministic and randomized SVD paths.

Each of the four fields gets its own orthonormal N x r basis computed from
its own (global) snapshot matrix; fields are never stacked into a joint
basis, which keeps the coupling block structure of the reduced model.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import matio
from .fom import State
from .snapshots import STATE_NAMES, GlobalSnapshots


class RankDeficiencyWarning(UserWarning):
    """Requested more modes than the snapshot matrix supports."""


def _fix_signs(U: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


@dataclass(frozen=True)
class PodBasis:
    """Blockwise POD basis: one N x r orthonormal matrix per state field."""

    Phi: dict     # name -> (N, r)
    sigma: dict   # name -> full singular-value vector (descending)

    @property
    def r(self) -> int:
        return self.Phi["h"].shape[1]

    @property
    def N(self) -> int:
        return self.Phi["h"].shape[0]

    def project(self, state: State) -> np.ndarray:
        """Reduced coordinates (4r,) of a full state."""
        return np.concatenate([self.Phi[j].T @ getattr(state, j)
                               for j in STATE_NAMES])

    def lift(self, z: np.ndarray) -> State:
        """Full state from reduced coordinates (4r,)."""
        r = self.r
        if z.shape != (4 * r,):
            raise ValueError(f"reduced vector has shape {z.shape}, "
                             f"expected ({4 * r},)")
        parts = {j: self.Phi[j] @ z[i * r:(i + 1) * r]
                 for i, j in enumerate(STATE_NAMES)}
        return State(**parts)

    def project_matrix(self, W: np.ndarray) -> np.ndarray:
        """Blockwise projection of a stacked (4N, K) matrix to (4r, K)."""
        N = self.N
        return np.vstack([self.Phi[j].T @ W[i * N:(i + 1) * N]
                          for i, j in enumerate(STATE_NAMES)])

    def lift_matrix(self, Z: np.ndarray) -> np.ndarray:
        """Blockwise lift of a reduced (4r, K) matrix to (4N, K)."""
        r = self.r
        return np.vstack([self.Phi[j] @ Z[i * r:(i + 1) * r]
                          for i, j in enumerate(STATE_NAMES)])

    def truncate(self, r: int) -> "PodBasis":
        """Basis restricted to the leading r modes per state."""
        if not 1 <= r <= self.r:
            raise ValueError(f"cannot truncate r={self.r} basis to r={r}")
        return PodBasis(Phi={j: self.Phi[j][:, :r].copy() for j in STATE_NAMES},
                        sigma=self.sigma)


def pod_basis(snapshots: GlobalSnapshots, r: int, method: str = "svd",
              oversampling: int = 10, power_iters: int = 2,
              seed: int = 0) -> PodBasis:
    """Leading-r left singular vectors of each per-state snapshot matrix.

    ``method`` selects the deterministic dense SVD or the randomized
    range-finder path ("rsvd"); the randomized path is seeded and
    reproducible.
    """
    N, m = snapshots.N, snapshots.W["h"].shape[1]
    if not 1 <= r <= min(N, m):
        raise ValueError(f"reduced dimension r={r} outside [1, {min(N, m)}]")
    Phi, sigma = {}, {}
    for j in STATE_NAMES:
        Wj = snapshots.W[j]
        if method == "svd":
            U, S, _ = np.linalg.svd(Wj, full_matrices=False)
        elif method == "rsvd":
            U, S = randomized_svd(Wj, r, oversampling=oversampling,
                                  power_iters=power_iters, seed=seed)
        else:
            raise ValueError(f"unknown SVD method {method!r}")
        rank = int(np.sum(S > S[0] * max(N, m) * np.finfo(float).eps)) if S.size else 0
        if rank < r:
            warnings.warn(
                f"state {j}: requested r={r} exceeds effective rank {rank}",
                RankDeficiencyWarning)
        Phi[j] = _fix_signs(U[:, :r].copy())
        sigma[j] = S.copy()
    return PodBasis(Phi=Phi, sigma=sigma)


def randomized_svd(A: np.ndarray, r: int, oversampling: int = 10,
                   power_iters: int = 2, seed: int = 0):
    """Randomized range-finder SVD; returns (U[:, :r], sigma[:r]).

    Gaussian test matrix, ``power_iters`` subspace iterations with QR
    re-orthonormalization, then an SVD of the projected small matrix.
    """
    N, m = A.shape
    k = r + oversampling
    if r < 1 or k > min(N, m):
        raise ValueError(f"need 1 <= r and r + p <= min{A.shape}, "
                         f"got r={r}, p={oversampling}")
    if power_iters < 0:
        raise ValueError("power_iters must be >= 0")
    if not np.any(A):
        warnings.warn("randomized SVD of an all-zero matrix", RankDeficiencyWarning)
        return np.zeros((N, r)), np.zeros(r)
    rng = np.random.default_rng(seed)
    Omega = rng.standard_normal((m, k))
    Q, _ = np.linalg.qr(A @ Omega)
    for _ in range(power_iters):
        Z, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ Z)
    B = Q.T @ A
    Ub, S, _ = np.linalg.svd(B, full_matrices=False)
    return Q @ Ub[:, :r], S[:r]


def save_basis(basis: PodBasis, path) -> None:
    """Persist the four basis blocks and spectra to the matrix container."""
    fields = {}
    for j in STATE_NAMES:
        fields[f"Phi_{j}"] = basis.Phi[j]
        fields[f"sigma_{j}"] = basis.sigma[j].reshape(-1, 1)
    matio.save_matrices(path, fields, {"r": basis.r})


def load_basis(path) -> PodBasis:
    """Load a basis written by :func:`save_basis`."""
    fields, _ = matio.load_matrices(path)
    Phi = {j: fields[f"Phi_{j}"] for j in STATE_NAMES}
    sigma = {j: fields[f"sigma_{j}"].ravel() for j in STATE_NAMES}
    return PodBasis(Phi=Phi, sigma=sigma)
