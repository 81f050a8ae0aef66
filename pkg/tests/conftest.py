"""Shared fixtures: small grids, short trajectories, random smooth states."""

import numpy as np
import pytest

from romswe.fom import PhysicalParams, State, double_vortex_initial, simulate
from romswe.grid import Grid, build_diff_2d
from romswe.snapshots import collect, concatenate

DT = 486.0
F_REF = 6.147e-5


def random_smooth_field(grid, rng, amplitude, kmax=3, n_modes=4):
    """Periodic low-wavenumber random field scaled to the given amplitude."""
    X, Y = grid.coords()
    Lx, Ly = grid.b - grid.a, grid.d - grid.c
    field = np.zeros_like(X)
    for _ in range(n_modes):
        kx, ky = rng.integers(-kmax, kmax + 1, size=2)
        phx, phy = rng.uniform(0, 2 * np.pi, size=2)
        field += rng.normal() * (np.cos(2 * np.pi * kx * X / Lx + phx)
                                 * np.cos(2 * np.pi * ky * Y / Ly + phy))
    peak = np.abs(field).max()
    return amplitude * field / peak if peak > 0 else field


def random_smooth_state(grid, params, rng) -> State:
    """Physically plausible random initial state with smooth fields."""
    return State(
        h=(750.0 + random_smooth_field(grid, rng, 75.0)).ravel(),
        u=random_smooth_field(grid, rng, 20.0).ravel(),
        v=random_smooth_field(grid, rng, 20.0).ravel(),
        s=(params.g * 1.05 + random_smooth_field(grid, rng, 0.5)).ravel(),
    )


def selection_matrix(N):
    """Dense (N, N*N) Hadamard selection: Q[i, i*N + i] = 1, so that
    Q @ kron(a, b) = a * b elementwise for vectors a, b."""
    Q = np.zeros((N, N * N))
    for i in range(N):
        Q[i, i * N + i] = 1.0
    return Q


def oracle_quad_blocks(basis, ops):
    """Brute-force dense reduced quadratic blocks via the full Kronecker
    structure, for validating the tensorial assembly."""
    Dx = ops.Dx.toarray()
    Dy = ops.Dy.toarray()
    Ph, Pu, Pv, Ps = (basis.Phi[j] for j in ("h", "u", "v", "s"))
    Q = selection_matrix(Ph.shape[0])
    kron = np.kron
    return {
        "H1_1": -(Pu.T @ Q @ kron(Dx @ Pu, Pu)),
        "H1_2": -(Pv.T @ Q @ kron(Dx @ Pv, Pu)),
        "H2_1": -(Ph.T @ Dx @ Q @ kron(Ph, Pu)),
        "H2_2": -(Pu.T @ Q @ kron(Pv, Dy @ Pu)),
        "H2_3": -(Pv.T @ Q @ kron(Pv, Dy @ Pv)),
        "H2_4": -(Ps.T @ Q @ kron(Dx @ Ps, Pu)),
        "H3_1": -(Ph.T @ Dy @ Q @ kron(Ph, Pv)),
        "H3_2": -0.5 * (Pu.T @ Q @ kron(Ph, Dx @ Ps)),
        "H3_3": -0.5 * (Pv.T @ Q @ kron(Ph, Dy @ Ps)),
        "H3_4": -(Ps.T @ Q @ kron(Dy @ Ps, Pv)),
        "H4_1": -(Pu.T @ Q @ kron(Ps, Dx @ Ph)),
        "H4_2": -(Pv.T @ Q @ kron(Ps, Dy @ Ph)),
    }


def random_orthonormal_basis(N, r, seed=0):
    """A PodBasis-shaped object with random orthonormal blocks."""
    from romswe.pod import PodBasis

    rng = np.random.default_rng(seed)
    Phi = {}
    for j in ("h", "u", "v", "s"):
        M, _ = np.linalg.qr(rng.standard_normal((N, r)))
        Phi[j] = M
    return PodBasis(Phi=Phi, sigma={j: np.ones(r) for j in ("h", "u", "v", "s")})


@pytest.fixture(scope="session")
def tiny_grid():
    return Grid.square(8, 5000e3)


@pytest.fixture(scope="session")
def tiny_ops(tiny_grid):
    return build_diff_2d(tiny_grid)


@pytest.fixture(scope="session")
def params():
    return PhysicalParams(f=F_REF)


@pytest.fixture(scope="session")
def tiny_state(tiny_grid, params):
    return double_vortex_initial(tiny_grid, params)


@pytest.fixture(scope="session")
def small_bundle(params):
    """n=12 grid, a short trajectory, and collected snapshots."""
    grid = Grid.square(12, 5000e3)
    ops = build_diff_2d(grid)
    w0 = double_vortex_initial(grid, params)
    traj = simulate(w0, DT, 15, params, ops)
    snaps = collect(traj, params, ops)
    return {"grid": grid, "ops": ops, "params": params, "traj": traj,
            "snaps": snaps, "global": concatenate([snaps])}

def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criterion lines after the capture-managed output."""
    try:
        from test_acceptance import CRITERION_LINES
    except ImportError:
        return
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.line(line)
