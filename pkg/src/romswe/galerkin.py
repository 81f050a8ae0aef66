"""Intrusive Galerkin reduced model via tensorial operator assembly.

The reduced quadratic blocks are built without ever materializing an
N x N^2 object: the Hadamard-product tensor applied to a pair of N x r
basis blocks collapses to the row-wise Kronecker product

    G(i, :) = kron(A(i, :), B(i, :)),

an N x r^2 matrix, which is then hit with the projection (and, where the
full-order term differentiates the product, a sparse derivative operator)
on the left.
"""

from dataclasses import dataclass

import numpy as np

from . import matio
from .grid import DiffOperators
from .pod import PodBasis
from .reduced import LinTerm, QuadTerm, ReducedModel

#: Quadratic block names in the order (target equation, left factor, right factor).
QUAD_LAYOUT = {
    "H1_1": ("u", "u", "u"),
    "H1_2": ("v", "v", "u"),
    "H2_1": ("h", "h", "u"),
    "H2_2": ("u", "v", "u"),
    "H2_3": ("v", "v", "v"),
    "H2_4": ("s", "s", "u"),
    "H3_1": ("h", "h", "v"),
    "H3_2": ("u", "h", "s"),
    "H3_3": ("v", "h", "s"),
    "H3_4": ("s", "s", "v"),
    "H4_1": ("u", "s", "h"),
    "H4_2": ("v", "s", "h"),
}


def rowwise_kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Row-wise Kronecker product: out[i, :] = kron(A[i, :], B[i, :])."""
    N = A.shape[0]
    return (A[:, :, None] * B[:, None, :]).reshape(N, A.shape[1] * B.shape[1])


def assemble_quadratic(basis: PodBasis, ops: DiffOperators,
                       max_r2: int = 1_000_000) -> dict:
    """The twelve reduced quadratic blocks, each r x r^2."""
    r = basis.r
    if r * r > max_r2:
        raise MemoryError(f"r^2 = {r * r} exceeds the assembly cap {max_r2}; "
                          "raise max_r2 to proceed")
    Dx, Dy = ops.Dx, ops.Dy
    Ph, Pu, Pv, Ps = (basis.Phi[j] for j in ("h", "u", "v", "s"))
    DxPu, DxPv, DxPh, DxPs = Dx @ Pu, Dx @ Pv, Dx @ Ph, Dx @ Ps
    DyPu, DyPv, DyPh, DyPs = Dy @ Pu, Dy @ Pv, Dy @ Ph, Dy @ Ps

    return {
        "H1_1": -(Pu.T @ rowwise_kron(DxPu, Pu)),
        "H1_2": -(Pv.T @ rowwise_kron(DxPv, Pu)),
        "H2_1": -(Ph.T @ (Dx @ rowwise_kron(Ph, Pu))),
        "H2_2": -(Pu.T @ rowwise_kron(Pv, DyPu)),
        "H2_3": -(Pv.T @ rowwise_kron(Pv, DyPv)),
        "H2_4": -(Ps.T @ rowwise_kron(DxPs, Pu)),
        "H3_1": -(Ph.T @ (Dy @ rowwise_kron(Ph, Pv))),
        "H3_2": -0.5 * (Pu.T @ rowwise_kron(Ph, DxPs)),
        "H3_3": -0.5 * (Pv.T @ rowwise_kron(Ph, DyPs)),
        "H3_4": -(Ps.T @ rowwise_kron(DyPs, Pv)),
        "H4_1": -(Pu.T @ rowwise_kron(Ps, DxPh)),
        "H4_2": -(Pv.T @ rowwise_kron(Ps, DyPh)),
    }


def assemble_linear(basis: PodBasis, ops: DiffOperators,
                    b: np.ndarray = None) -> dict:
    """Coriolis-independent factors of the reduced linear operator.

    The u-v coupling blocks are scaled by f(mu) at evaluation time; the
    topography blocks are parameter-free.
    """
    Ph, Pu, Pv, Ps = (basis.Phi[j] for j in ("h", "u", "v", "s"))
    out = {"Cuv": Pu.T @ Pv, "Cvu": Pv.T @ Pu}
    if b is not None and np.any(b):
        dxb = np.asarray(ops.Dx @ b)
        dyb = np.asarray(ops.Dy @ b)
        out["Tu"] = Pu.T @ (dxb[:, None] * Ps)
        out["Tv"] = Pv.T @ (dyb[:, None] * Ps)
    else:
        r = basis.r
        out["Tu"] = np.zeros((r, r))
        out["Tv"] = np.zeros((r, r))
    return out


@dataclass
class GalerkinRom:
    """Assembled intrusive reduced model."""

    r: int
    quad: dict   # twelve r x r^2 blocks
    lin: dict    # Cuv, Cvu, Tu, Tv

    def model(self) -> ReducedModel:
        """Bind the blocks into the shared reduced stepper."""
        r = self.r
        quad_terms = [
            QuadTerm(0, self.quad["H2_1"], 0, 1),
            QuadTerm(0, self.quad["H3_1"], 0, 2),
            QuadTerm(1, self.quad["H1_1"], 1, 1),
            QuadTerm(1, self.quad["H2_2"], 2, 1),
            QuadTerm(1, self.quad["H3_2"], 0, 3),
            QuadTerm(1, self.quad["H4_1"], 3, 0),
            QuadTerm(2, self.quad["H1_2"], 2, 1),
            QuadTerm(2, self.quad["H2_3"], 2, 2),
            QuadTerm(2, self.quad["H3_3"], 0, 3),
            QuadTerm(2, self.quad["H4_2"], 3, 0),
            QuadTerm(3, self.quad["H2_4"], 3, 1),
            QuadTerm(3, self.quad["H3_4"], 3, 2),
        ]
        lin_terms = [
            LinTerm(1, self.lin["Cuv"], 2, with_f=True),
            LinTerm(2, -self.lin["Cvu"], 1, with_f=True),
            LinTerm(1, -self.lin["Tu"], 3, with_f=False),
            LinTerm(2, -self.lin["Tv"], 3, with_f=False),
        ]
        return ReducedModel(r=r, quad_terms=quad_terms, lin_terms=lin_terms)


def assemble(basis: PodBasis, ops: DiffOperators, b: np.ndarray = None,
             max_r2: int = 1_000_000) -> GalerkinRom:
    """Full offline assembly of the intrusive reduced model."""
    return GalerkinRom(r=basis.r,
                       quad=assemble_quadratic(basis, ops, max_r2=max_r2),
                       lin=assemble_linear(basis, ops, b=b))


def save_rom(rom: GalerkinRom, path) -> None:
    matio.save_matrices(path, {**rom.quad, **rom.lin}, {"r": rom.r})


def load_rom(path) -> GalerkinRom:
    fields, meta = matio.load_matrices(path)
    quad = {k: fields[k] for k in QUAD_LAYOUT}
    lin = {k: fields[k] for k in ("Cuv", "Cvu", "Tu", "Tv")}
    return GalerkinRom(r=int(meta["r"]), quad=quad, lin=lin)
