"""Error metrics comparing full and reduced trajectories.

All metrics are post hoc: they consume stored snapshot matrices or
trajectories, never hook into the steppers.
"""

import warnings

import numpy as np

from .snapshots import STATE_NAMES


class UndefinedMetricError(ZeroDivisionError):
    """Normalizing quantity is zero; the metric is undefined."""


def rel_error_global(W: np.ndarray, Z_lifted: np.ndarray) -> float:
    """Frobenius-norm relative error ||Z_lifted - W||_F / ||W||_F.

    ``W`` is the stacked full snapshot matrix (4N, K) and ``Z_lifted`` the
    reduced snapshots lifted to full dimension.
    """
    if W.shape != Z_lifted.shape:
        raise ValueError(f"shape mismatch: {W.shape} vs {Z_lifted.shape}")
    denom = np.linalg.norm(W)
    if denom == 0:
        raise UndefinedMetricError("reference snapshot matrix is zero")
    return float(np.linalg.norm(Z_lifted - W) / denom)


def _l2_norms(M: np.ndarray, area: float) -> np.ndarray:
    """Discrete L2(Omega) norm of each column; area = dx*dy."""
    return np.sqrt(area * np.sum(M * M, axis=0))


def avg_rel_error_state(W_full: np.ndarray, W_rom: np.ndarray,
                        area: float) -> float:
    """Time-averaged relative L2 error of one state's (N, K) snapshots."""
    if W_full.shape != W_rom.shape:
        raise ValueError(f"shape mismatch: {W_full.shape} vs {W_rom.shape}")
    ref = _l2_norms(W_full, area)
    err = _l2_norms(W_full - W_rom, area)
    keep = ref > 0
    if not np.all(keep):
        warnings.warn(f"skipping {np.sum(~keep)} zero-norm snapshot columns")
    if not np.any(keep):
        raise UndefinedMetricError("all reference columns have zero norm")
    return float(np.sum(err[keep] / ref[keep]) / W_full.shape[1])


def avg_rel_errors(W_full_stacked: np.ndarray, W_rom_stacked: np.ndarray,
                   area: float) -> dict:
    """Per-state time-averaged relative L2 errors of stacked (4N, K) matrices."""
    N = W_full_stacked.shape[0] // 4
    out = {}
    for i, j in enumerate(STATE_NAMES):
        rows = slice(i * N, (i + 1) * N)
        out[j] = avg_rel_error_state(W_full_stacked[rows], W_rom_stacked[rows],
                                     area)
    return out


def rel_error_timesteps(W_full: np.ndarray, W_rom: np.ndarray,
                        area: float) -> np.ndarray:
    """Per-step relative L2 error of stacked snapshots, length K."""
    if W_full.shape != W_rom.shape:
        raise ValueError(f"shape mismatch: {W_full.shape} vs {W_rom.shape}")
    ref = _l2_norms(W_full, area)
    if np.any(ref == 0):
        raise UndefinedMetricError("zero-norm snapshot column")
    return _l2_norms(W_full - W_rom, area) / ref


def conserved_rel_error(series: np.ndarray) -> np.ndarray:
    """Time-averaged relative invariant errors from a (K+1, 4) series.

    Entry order follows the series columns (energy, mass, vorticity,
    buoyancy); the first row is the reference state.
    """
    series = np.asarray(series, dtype=float)
    ref = series[0]
    if np.any(ref == 0):
        raise UndefinedMetricError("an invariant is zero at the initial state")
    K = series.shape[0] - 1
    if K < 1:
        raise ValueError("series must hold at least one step")
    return np.mean(np.abs(series[1:] - ref) / np.abs(ref), axis=0)


def drift_slope(series: np.ndarray, tail: float = 0.8) -> float:
    """Slope per step of a least-squares line through the series tail.

    Fits the last ``tail`` fraction of the samples; a bounded, non-drifting
    error series has slope near zero.
    """
    y = np.asarray(series, dtype=float)
    start = int(np.floor(len(y) * (1.0 - tail)))
    y = y[start:]
    if len(y) < 2:
        raise ValueError("too few samples for a slope estimate")
    x = np.arange(len(y), dtype=float)
    return float(np.polyfit(x, y, 1)[0])


def train_test_errors(fom_mats, rom_lifted_mats, n_train: int):
    """Average global relative errors over train/test parameter splits.

    Inputs are parallel lists of stacked (4N, K) matrices, training runs
    first.  Returns (train_avg, test_avg); the test average is None when
    the split has no test runs.
    """
    if len(fom_mats) != len(rom_lifted_mats):
        raise ValueError("run lists differ in length")
    if not 1 <= n_train <= len(fom_mats):
        raise ValueError(f"invalid training split {n_train} of {len(fom_mats)}")
    errs = [rel_error_global(W, Z) for W, Z in zip(fom_mats, rom_lifted_mats)]
    train = float(np.mean(errs[:n_train]))
    test = float(np.mean(errs[n_train:])) if len(errs) > n_train else None
    return train, test
