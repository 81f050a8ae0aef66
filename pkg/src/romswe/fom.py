"""Full-order rotating thermal shallow water model.

Semi-discrete dynamics for the four stacked fields w = (h, u, v, s):

    dh/dt = -Dx(u*h) - Dy(v*h)
    du/dt = -u*(Dx u) - v*(Dy u) - (h/2)*(Dx s) - s*(Dx h) - s*(Dx b) + f*v
    dv/dt = -u*(Dx v) - v*(Dy v) - (h/2)*(Dy s) - s*(Dy h) - s*(Dy b) - f*u
    ds/dt = -u*(Dx s) - v*(Dy s)

with * the elementwise product.  Time integration uses the linearly
implicit one-step-Newton scheme for quadratic vector fields: each step
solves (I - dt/2 * F'(w)) * delta = dt * F(w).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import DiffOperators, Grid

#: Rotational speed of the Earth [rad/s].
EARTH_OMEGA = 7.292e-5


class SolveError(RuntimeError):
    """Raised when a time-step linear system cannot be solved reliably."""


def coriolis(mu: float) -> float:
    """Coriolis parameter f = 2*Omega*sin(mu) at latitude mu [rad]."""
    return 2.0 * EARTH_OMEGA * np.sin(mu)


@dataclass(frozen=True)
class PhysicalParams:
    """Physical constants of a model instance.

    Exactly one of ``f`` (Coriolis parameter, 1/s) or ``mu`` (latitude,
    radians) must be given; ``mu`` sets f = 2*Omega*sin(mu).  Topography
    ``b`` defaults to flat bottom.
    """

    f: float = None
    mu: float = None
    g: float = 9.80616
    b: np.ndarray = None

    def __post_init__(self):
        if (self.f is None) == (self.mu is None):
            raise ValueError("specify exactly one of f or mu")
        if self.f is None:
            object.__setattr__(self, "f", coriolis(self.mu))

    def topography(self, N: int) -> np.ndarray:
        if self.b is None:
            return np.zeros(N)
        b = np.asarray(self.b, dtype=float)
        if b.shape != (N,):
            raise ValueError(f"topography has shape {b.shape}, expected ({N},)")
        return b


@dataclass(frozen=True)
class State:
    """The four prognostic fields, each a length-N vector."""

    h: np.ndarray
    u: np.ndarray
    v: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        N = self.h.shape[0]
        for name in ("h", "u", "v", "s"):
            vec = getattr(self, name)
            if vec.ndim != 1 or vec.shape[0] != N:
                raise ValueError(f"field {name} has shape {vec.shape}, "
                                 f"expected ({N},)")

    @property
    def N(self) -> int:
        return self.h.shape[0]

    def stacked(self) -> np.ndarray:
        """Stacked 4N-vector (h, u, v, s)."""
        return np.concatenate([self.h, self.u, self.v, self.s])

    @classmethod
    def from_stacked(cls, w: np.ndarray) -> "State":
        if w.shape[0] % 4:
            raise ValueError(f"stacked state length {w.shape[0]} not divisible by 4")
        N = w.shape[0] // 4
        return cls(h=w[:N], u=w[N:2 * N], v=w[2 * N:3 * N], s=w[3 * N:])


@dataclass
class Trajectory:
    """Uniformly spaced sequence of states w^0 ... w^K."""

    states: list
    dt: float

    @property
    def K(self) -> int:
        return len(self.states) - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.states)) * self.dt

    def matrix(self) -> np.ndarray:
        """Stacked snapshot matrix of shape (4N, K+1) including w^0."""
        return np.column_stack([w.stacked() for w in self.states])


def rhs(state: State, params: PhysicalParams, ops: DiffOperators) -> np.ndarray:
    """Right-hand side F(w), returned as a stacked 4N-vector."""
    h, u, v, s = state.h, state.u, state.v, state.s
    if ops.Dx.shape[0] != state.N:
        raise ValueError(f"operator size {ops.Dx.shape[0]} != state size {state.N}")
    Dx, Dy = ops.Dx, ops.Dy
    b = params.topography(state.N)
    f = params.f
    Fh = -Dx @ (u * h) - Dy @ (v * h)
    Fu = (-u * (Dx @ u) - v * (Dy @ u) - 0.5 * h * (Dx @ s)
          - s * (Dx @ h) - s * (Dx @ b) + f * v)
    Fv = (-u * (Dx @ v) - v * (Dy @ v) - 0.5 * h * (Dy @ s)
          - s * (Dy @ h) - s * (Dy @ b) - f * u)
    Fs = -u * (Dx @ s) - v * (Dy @ s)
    return np.concatenate([Fh, Fu, Fv, Fs])


def _dg(vec: np.ndarray) -> sp.dia_matrix:
    return sp.diags(vec)


def jacobian(state: State, params: PhysicalParams,
             ops: DiffOperators) -> sp.csr_matrix:
    """Exact Jacobian F'(w) as a sparse 4N x 4N matrix in (h, u, v, s) blocks."""
    h, u, v, s = state.h, state.u, state.v, state.s
    if ops.Dx.shape[0] != state.N:
        raise ValueError(f"operator size {ops.Dx.shape[0]} != state size {state.N}")
    Dx, Dy = ops.Dx, ops.Dy
    N = state.N
    b = params.topography(N)
    f = params.f
    fI = f * sp.identity(N, format="csr")

    J_hh = -Dx @ _dg(u) - Dy @ _dg(v)
    J_hu = -Dx @ _dg(h)
    J_hv = -Dy @ _dg(h)

    J_uh = -0.5 * _dg(Dx @ s) - _dg(s) @ Dx
    J_uu = -_dg(Dx @ u) - _dg(u) @ Dx - _dg(v) @ Dy
    J_uv = -_dg(Dy @ u) + fI
    J_us = -0.5 * _dg(h) @ Dx - _dg(Dx @ h) - _dg(Dx @ b)

    J_vh = -0.5 * _dg(Dy @ s) - _dg(s) @ Dy
    J_vu = -_dg(Dx @ v) - fI
    J_vv = -_dg(u) @ Dx - _dg(Dy @ v) - _dg(v) @ Dy
    J_vs = -0.5 * _dg(h) @ Dy - _dg(Dy @ h) - _dg(Dy @ b)

    J_su = -_dg(Dx @ s)
    J_sv = -_dg(Dy @ s)
    J_ss = -_dg(u) @ Dx - _dg(v) @ Dy

    return sp.bmat([
        [J_hh, J_hu, J_hv, None],
        [J_uh, J_uu, J_uv, J_us],
        [J_vh, J_vu, J_vv, J_vs],
        [None, J_su, J_sv, J_ss],
    ], format="csr")


def kahan_step(state: State, dt: float, params: PhysicalParams,
               ops: DiffOperators) -> State:
    """One linearly implicit step: solve (I - dt/2 J) delta = dt F(w)."""
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    w = state.stacked()
    F = rhs(state, params, ops)
    J = jacobian(state, params, ops)
    A = (sp.identity(4 * state.N, format="csr") - 0.5 * dt * J).tocsc()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:  # singular factorization
        raise SolveError(f"time-step system is singular: {exc}") from exc
    delta = lu.solve(dt * F)
    residual = np.linalg.norm(A @ delta - dt * F)
    scale = np.linalg.norm(dt * F)
    if scale > 0 and residual > 1e-8 * scale:
        raise SolveError(
            f"time-step solve inaccurate: relative residual {residual / scale:.3e} "
            "(system likely near-singular)")
    return State.from_stacked(w + delta)


def simulate(initial: State, dt: float, K: int, params: PhysicalParams,
             ops: DiffOperators) -> Trajectory:
    """Integrate K steps from the initial state."""
    if K < 1:
        raise ValueError(f"need at least one step, got K={K}")
    states = [initial]
    for k in range(K):
        try:
            states.append(kahan_step(states[-1], dt, params, ops))
        except SolveError as exc:
            raise SolveError(f"step {k + 1}/{K} failed: {exc}") from exc
    return Trajectory(states=states, dt=dt)


@dataclass(frozen=True)
class ConservedQuantities:
    """Discrete energy, mass, total potential vorticity and buoyancy."""

    energy: float
    mass: float
    vorticity: float
    buoyancy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.energy, self.mass, self.vorticity, self.buoyancy])

    names = ("energy", "mass", "vorticity", "buoyancy")


def conserved_quantities(state: State, params: PhysicalParams, grid: Grid,
                         ops: DiffOperators) -> ConservedQuantities:
    """Evaluate the four discrete invariants, area-weighted by dx*dy."""
    h, u, v, s = state.h, state.u, state.v, state.s
    b = params.topography(state.N)
    area = grid.dx * grid.dy
    energy = area * np.sum(0.5 * h * h * s + h * s * b + 0.5 * h * (u * u + v * v))
    mass = area * np.sum(h)
    # centered differences with periodic wrap = the sparse operators
    vort = area * np.sum(ops.Dx @ v - ops.Dy @ u + params.f)
    buoy = area * np.sum(h * s)
    return ConservedQuantities(energy=energy, mass=mass, vorticity=vort,
                               buoyancy=buoy)


def conserved_series(traj: Trajectory, params: PhysicalParams, grid: Grid,
                     ops: DiffOperators) -> np.ndarray:
    """Invariants along a trajectory, shape (K+1, 4)."""
    return np.array([conserved_quantities(w, params, grid, ops).as_array()
                     for w in traj.states])


@dataclass(frozen=True)
class VortexScenario:
    """Double-vortex initial-condition parameters on [0, L]^2."""

    L: float = 5000e3
    H0: float = 750.0
    dh: float = 75.0
    sigma_x: float = None
    sigma_y: float = None
    ox: float = 0.1
    oy: float = 0.1

    def __post_init__(self):
        if self.sigma_x is None:
            object.__setattr__(self, "sigma_x", 3.0 * self.L / 40.0)
        if self.sigma_y is None:
            object.__setattr__(self, "sigma_y", 3.0 * self.L / 40.0)


def double_vortex_initial(grid: Grid, params: PhysicalParams,
                          scenario: VortexScenario = None) -> State:
    """Double-vortex initial state with a sinusoidal buoyancy profile.

    Two counter-rotating geostrophic vortices offset from the domain center
    by (ox*L, oy*L); the height perturbation carries a mean correction so
    the average height stays close to H0.
    """
    sc = scenario or VortexScenario()
    if params.f == 0:
        raise ValueError("double-vortex velocities require a nonzero Coriolis "
                         "parameter")
    L, sx, sy = sc.L, sc.sigma_x, sc.sigma_y
    X, Y = grid.coords()
    xc = 0.5 * L
    xc1, xc2 = (0.5 - sc.ox) * L, (0.5 + sc.ox) * L
    yc1, yc2 = (0.5 - sc.oy) * L, (0.5 + sc.oy) * L

    xp1 = L / (np.pi * sx) * np.sin(np.pi / L * (X - xc1))
    xp2 = L / (np.pi * sx) * np.sin(np.pi / L * (X - xc2))
    yp1 = L / (np.pi * sy) * np.sin(np.pi / L * (Y - yc1))
    yp2 = L / (np.pi * sy) * np.sin(np.pi / L * (Y - yc2))
    xpp1 = L / (2 * np.pi * sx) * np.sin(2 * np.pi / L * (X - xc1))
    xpp2 = L / (2 * np.pi * sx) * np.sin(2 * np.pi / L * (X - xc2))
    ypp1 = L / (2 * np.pi * sy) * np.sin(2 * np.pi / L * (Y - yc1))
    ypp2 = L / (2 * np.pi * sy) * np.sin(2 * np.pi / L * (Y - yc2))

    e1 = np.exp(-0.5 * (xp1 ** 2 + yp1 ** 2))
    e2 = np.exp(-0.5 * (xp2 ** 2 + yp2 ** 2))

    h0 = sc.H0 - sc.dh * (e1 + e2 - 4.0 * np.pi * sx * sy / L ** 2)
    u0 = -params.g * sc.dh / (params.f * sy) * (ypp1 * e1 + ypp2 * e2)
    v0 = params.g * sc.dh / (params.f * sx) * (xpp1 * e1 + xpp2 * e2)
    s0 = params.g * (1.0 + 0.05 * np.sin(2 * np.pi / L * (X - xc)))

    return State(h=h0.ravel(), u=u0.ravel(), v=v0.ravel(), s=s0.ravel())
