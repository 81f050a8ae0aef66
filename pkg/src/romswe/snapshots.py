"""Snapshot collection, multi-parameter assembly, and persistence.

A snapshot set stores the four per-state trajectory matrices W_h..W_s of
shape (N, K) together with the matching time-derivative matrices, which are
obtained by evaluating the model right-hand side at each kept snapshot
(exact, no finite differencing).  The first stored column is the state
after one step; the initial condition is kept separately.
"""

from dataclasses import dataclass, field

import numpy as np

from . import matio
from .fom import PhysicalParams, State, Trajectory, rhs
from .grid import DiffOperators

STATE_NAMES = ("h", "u", "v", "s")


@dataclass
class SnapshotSet:
    """Per-state snapshot and derivative matrices for one trajectory."""

    W: dict            # name -> (N, K) state snapshots
    Wdot: dict         # name -> (N, K) rhs evaluations
    mu: float = None   # parameter label (None for non-parametric runs)
    stride: int = 1
    initial: np.ndarray = None  # stacked w^0, length 4N

    @property
    def N(self) -> int:
        return self.W["h"].shape[0]

    @property
    def K(self) -> int:
        return self.W["h"].shape[1]

    def stacked(self) -> np.ndarray:
        """Stacked (4N, K) snapshot matrix."""
        return np.vstack([self.W[j] for j in STATE_NAMES])

    def head(self, K: int) -> "SnapshotSet":
        """The first K columns (training-window restriction)."""
        if not 1 <= K <= self.K:
            raise ValueError(f"cannot keep {K} of {self.K} columns")
        return SnapshotSet(
            W={j: self.W[j][:, :K].copy() for j in STATE_NAMES},
            Wdot={j: self.Wdot[j][:, :K].copy() for j in STATE_NAMES},
            mu=self.mu, stride=self.stride, initial=self.initial)


def collect(trajectory: Trajectory, params: PhysicalParams, ops: DiffOperators,
            stride: int = 1, mu: float = None) -> SnapshotSet:
    """Subsample a trajectory and evaluate derivatives at the kept columns.

    Columns w^1, w^(1+stride), w^(1+2*stride), ... are kept; w^0 goes to the
    set's ``initial`` field.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if trajectory.K < 1:
        raise ValueError("trajectory holds no steps to collect")
    kept = trajectory.states[1::stride]
    N = kept[0].N
    K = len(kept)
    W = {j: np.empty((N, K)) for j in STATE_NAMES}
    Wdot = {j: np.empty((N, K)) for j in STATE_NAMES}
    for k, state in enumerate(kept):
        F = State.from_stacked(rhs(state, params, ops))
        for j in STATE_NAMES:
            W[j][:, k] = getattr(state, j)
            Wdot[j][:, k] = getattr(F, j)
    return SnapshotSet(W=W, Wdot=Wdot, mu=mu, stride=stride,
                       initial=trajectory.states[0].stacked())


@dataclass
class GlobalSnapshots:
    """Per-state matrices concatenated over parameters, column blocks in order."""

    W: dict            # name -> (N, sum K_i)
    mus: list = field(default_factory=list)
    widths: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return self.W["h"].shape[0]

    def stacked(self) -> np.ndarray:
        return np.vstack([self.W[j] for j in STATE_NAMES])


def concatenate(sets) -> GlobalSnapshots:
    """Concatenate snapshot sets column-wise, parameter order preserved."""
    sets = list(sets)
    if not sets:
        raise ValueError("no snapshot sets to concatenate")
    N = sets[0].N
    for st in sets:
        if st.N != N:
            raise ValueError(f"snapshot row count mismatch: {st.N} != {N}")
    W = {j: np.hstack([st.W[j] for st in sets]) for j in STATE_NAMES}
    return GlobalSnapshots(W=W, mus=[st.mu for st in sets],
                           widths=[st.K for st in sets])


def save(snapshot_set: SnapshotSet, path) -> None:
    """Persist a snapshot set to the common matrix container format."""
    fields = {}
    for j in STATE_NAMES:
        fields[f"W_{j}"] = snapshot_set.W[j]
        fields[f"Wdot_{j}"] = snapshot_set.Wdot[j]
    if snapshot_set.initial is not None:
        fields["initial"] = snapshot_set.initial.reshape(-1, 1)
    meta = {"stride": snapshot_set.stride}
    if snapshot_set.mu is not None:
        meta["mu"] = repr(float(snapshot_set.mu))
    matio.save_matrices(path, fields, meta)


def load(path) -> SnapshotSet:
    """Load a snapshot set written by :func:`save`."""
    fields, meta = matio.load_matrices(path)
    try:
        W = {j: fields[f"W_{j}"] for j in STATE_NAMES}
        Wdot = {j: fields[f"Wdot_{j}"] for j in STATE_NAMES}
    except KeyError as exc:
        raise matio.CorruptHeaderError(f"{path}: missing snapshot field {exc}")
    shapes = {m.shape for m in list(W.values()) + list(Wdot.values())}
    if len(shapes) != 1:
        raise matio.DimensionError(f"{path}: inconsistent snapshot shapes {shapes}")
    initial = fields.get("initial")
    return SnapshotSet(
        W=W, Wdot=Wdot,
        mu=float(meta["mu"]) if "mu" in meta else None,
        stride=int(meta.get("stride", 1)),
        initial=None if initial is None else initial.ravel())
