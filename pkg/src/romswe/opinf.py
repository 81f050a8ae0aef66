"""Non-intrusive operator learning from re-projected trajectories.

The sampling scheme projects each full-order snapshot onto the POD
subspace, lifts it back, and queries the full-order right-hand side at the
lifted state.  The recorded pairs (reduced state, reduced derivative) then
obey exactly the Markovian reduced dynamics, so regression on them can
recover the intrusively projected operators.  Each of the four state
equations is fit independently; regression features are Khatri-Rao
(column-wise Kronecker) products of the reduced trajectories plus an
f(mu)-scaled linear column block for the Coriolis coupling.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import matio
from .fom import PhysicalParams, State, rhs
from .grid import DiffOperators
from .pod import PodBasis
from .reduced import LinTerm, QuadTerm, ReducedModel
from .snapshots import STATE_NAMES, SnapshotSet


class UnderdeterminedWarning(UserWarning):
    """Fewer regression rows than unknown columns (K < r + r^2 regime)."""


def khatri_rao(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product; column k is kron(A[:, k], B[:, k])."""
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"column mismatch: {A.shape[1]} != {B.shape[1]}")
    K = A.shape[1]
    return (A[:, None, :] * B[None, :, :]).reshape(A.shape[0] * B.shape[0], K)


@dataclass
class ReprojectedData:
    """Reduced states and derivatives for one parameter value."""

    What: dict      # name -> (r, K)
    Whatdot: dict   # name -> (r, K)
    f: float        # Coriolis value used when generating the data
    mu: float = None

    @property
    def r(self) -> int:
        return self.What["h"].shape[0]

    @property
    def K(self) -> int:
        return self.What["h"].shape[1]


def reproject(snapshots: SnapshotSet, basis: PodBasis, params: PhysicalParams,
              ops: DiffOperators) -> ReprojectedData:
    """Open-loop re-projection of stored full states.

    Every stored snapshot w is projected and lifted to Phi Phi^T w, the
    full-order right-hand side is evaluated there, and both the reduced
    state Phi^T w and the reduced derivative are recorded.
    """
    if snapshots.N != basis.N:
        raise ValueError(f"snapshot size {snapshots.N} != basis size {basis.N}")
    r, K = basis.r, snapshots.K
    What = {j: np.empty((r, K)) for j in STATE_NAMES}
    Whatdot = {j: np.empty((r, K)) for j in STATE_NAMES}
    for k in range(K):
        w = State(**{j: snapshots.W[j][:, k] for j in STATE_NAMES})
        z = basis.project(w)
        Fz = State.from_stacked(rhs(basis.lift(z), params, ops))
        for i, j in enumerate(STATE_NAMES):
            What[j][:, k] = z[i * r:(i + 1) * r]
            Whatdot[j][:, k] = basis.Phi[j].T @ getattr(Fz, j)
    return ReprojectedData(What=What, Whatdot=Whatdot, f=params.f,
                           mu=snapshots.mu)


def reproject_closed_loop(initial: State, basis: PodBasis,
                          params: PhysicalParams, ops: DiffOperators,
                          dt: float, K: int) -> ReprojectedData:
    """Closed-loop variant: restart the full model from the lifted reduced
    state at every step instead of reusing a stored trajectory."""
    from .fom import kahan_step

    r = basis.r
    What = {j: np.empty((r, K)) for j in STATE_NAMES}
    Whatdot = {j: np.empty((r, K)) for j in STATE_NAMES}
    z = basis.project(initial)
    for k in range(K):
        lifted = basis.lift(z)
        z = basis.project(kahan_step(lifted, dt, params, ops))
        proj_state = basis.lift(z)
        Fz = State.from_stacked(rhs(proj_state, params, ops))
        for i, j in enumerate(STATE_NAMES):
            What[j][:, k] = z[i * r:(i + 1) * r]
            Whatdot[j][:, k] = basis.Phi[j].T @ getattr(Fz, j)
    return ReprojectedData(What=What, Whatdot=Whatdot, f=params.f, mu=None)


def project_plain(snapshots: SnapshotSet, basis: PodBasis) -> ReprojectedData:
    """Plain (non-re-projected) reduced data from stored derivatives."""
    mu = snapshots.mu
    f = PhysicalParams(mu=mu).f if mu is not None else None
    What = {j: basis.Phi[j].T @ snapshots.W[j] for j in STATE_NAMES}
    Whatdot = {j: basis.Phi[j].T @ snapshots.Wdot[j] for j in STATE_NAMES}
    return ReprojectedData(What=What, Whatdot=Whatdot, f=f, mu=mu)


def _data_matrix_blocks(d: ReprojectedData):
    """Per-parameter regression matrices for the four state equations."""
    Wh, Wu, Wv, Ws = (d.What[j] for j in STATE_NAMES)
    A_h = np.hstack([khatri_rao(Wh, Wu).T, khatri_rao(Wh, Wv).T])
    A_u = np.hstack([khatri_rao(Wu, Wu).T, khatri_rao(Wv, Wu).T,
                     khatri_rao(Wh, Ws).T, d.f * Wv.T])
    A_v = np.hstack([khatri_rao(Wu, Wv).T, khatri_rao(Wv, Wv).T,
                     khatri_rao(Wh, Ws).T, d.f * Wu.T])
    A_s = np.hstack([khatri_rao(Wu, Ws).T, khatri_rao(Wv, Ws).T])
    return {"h": A_h, "u": A_u, "v": A_v, "s": A_s}


def assemble_data_matrices(datasets):
    """Stack per-parameter blocks; returns ({eq: A}, {eq: RHS})."""
    datasets = list(datasets)
    if not datasets:
        raise ValueError("no reprojected data supplied")
    A = {j: [] for j in STATE_NAMES}
    B = {j: [] for j in STATE_NAMES}
    for d in datasets:
        if d.f is None:
            raise ValueError("reprojected data lacks a Coriolis value")
        blocks = _data_matrix_blocks(d)
        for j in STATE_NAMES:
            A[j].append(blocks[j])
            B[j].append(d.Whatdot[j].T)
    A = {j: np.vstack(A[j]) for j in STATE_NAMES}
    B = {j: np.vstack(B[j]) for j in STATE_NAMES}
    for j in STATE_NAMES:
        rows, cols = A[j].shape
        if rows < cols:
            warnings.warn(
                f"equation {j}: {rows} regression rows for {cols} unknown "
                "columns; the fit is underdetermined and min-norm regularized",
                UnderdeterminedWarning)
    return A, B


@dataclass
class OpInfRom:
    """Learned reduced model: quadratic blocks plus f-scaled linear blocks."""

    r: int
    H: dict                       # "H11".."H42" -> (r, r^2)
    L1: np.ndarray                # (r, r), u-equation, scaled by f(mu)
    L2: np.ndarray                # (r, r), v-equation, scaled by f(mu)
    tolerances: dict = field(default_factory=dict)
    condition_numbers: dict = field(default_factory=dict)

    def model(self) -> ReducedModel:
        r = self.r
        quad_terms = [
            QuadTerm(0, self.H["H11"], 0, 1),
            QuadTerm(0, self.H["H12"], 0, 2),
            QuadTerm(1, self.H["H21"], 1, 1),
            QuadTerm(1, self.H["H22"], 2, 1),
            QuadTerm(1, self.H["H23"], 0, 3),
            QuadTerm(2, self.H["H31"], 1, 2),
            QuadTerm(2, self.H["H32"], 2, 2),
            QuadTerm(2, self.H["H33"], 0, 3),
            QuadTerm(3, self.H["H41"], 1, 3),
            QuadTerm(3, self.H["H42"], 2, 3),
        ]
        lin_terms = [
            LinTerm(1, self.L1, 2, with_f=True),
            LinTerm(2, self.L2, 1, with_f=True),
        ]
        return ReducedModel(r=r, quad_terms=quad_terms, lin_terms=lin_terms)


def factor_data_matrices(A: dict) -> dict:
    """Thin SVD of each equation's data matrix, reusable across tolerances."""
    return {j: np.linalg.svd(A[j], full_matrices=False) for j in STATE_NAMES}


def operators_from_factors(factors: dict, B: dict, r: int,
                           tol) -> "OpInfRom":
    """Assemble a learned model from precomputed data-matrix SVDs."""
    tols = dict(tol) if isinstance(tol, dict) else {j: tol for j in STATE_NAMES}
    X = {}
    conds = {}
    for j in STATE_NAMES:
        U, S, Vt = factors[j]
        rank = int(np.sum(S > tols[j]))
        if rank == 0:
            X[j] = np.zeros((r, Vt.shape[1]))
        else:
            X[j] = (Vt[:rank].T @ ((U[:, :rank].T @ B[j]) / S[:rank, None])).T
        smin = S[S > 0].min() if np.any(S > 0) else 0.0
        conds[j] = float(S[0] / smin) if smin > 0 else np.inf
    r2 = r * r
    H = {
        "H11": X["h"][:, :r2], "H12": X["h"][:, r2:2 * r2],
        "H21": X["u"][:, :r2], "H22": X["u"][:, r2:2 * r2],
        "H23": X["u"][:, 2 * r2:3 * r2],
        "H31": X["v"][:, :r2], "H32": X["v"][:, r2:2 * r2],
        "H33": X["v"][:, 2 * r2:3 * r2],
        "H41": X["s"][:, :r2], "H42": X["s"][:, r2:2 * r2],
    }
    return OpInfRom(r=r, H=H, L1=X["u"][:, 3 * r2:], L2=X["v"][:, 3 * r2:],
                    tolerances=tols, condition_numbers=conds)


def infer_operators(datasets, tol=0.0) -> OpInfRom:
    """Fit the reduced operators by minimum-norm regression.

    ``tol`` is either one drop tolerance for all four equations or a dict
    keyed by state name.
    """
    datasets = list(datasets)
    r = datasets[0].r
    A, B = assemble_data_matrices(datasets)
    return operators_from_factors(factor_data_matrices(A), B, r, tol)


def save_rom(rom: OpInfRom, path) -> None:
    fields = dict(rom.H)
    fields["L1"] = rom.L1
    fields["L2"] = rom.L2
    meta = {"r": rom.r}
    for j, t in rom.tolerances.items():
        meta[f"tol_{j}"] = repr(float(t))
    matio.save_matrices(path, fields, meta)


def load_rom(path) -> OpInfRom:
    fields, meta = matio.load_matrices(path)
    H = {k: v for k, v in fields.items() if k.startswith("H")}
    tols = {j: float(meta[f"tol_{j}"]) for j in STATE_NAMES
            if f"tol_{j}" in meta}
    return OpInfRom(r=int(meta["r"]), H=H, L1=fields["L1"], L2=fields["L2"],
                    tolerances=tols)
