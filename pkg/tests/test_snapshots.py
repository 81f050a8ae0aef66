"""Snapshot collection, concatenation, and persistence tests."""

import numpy as np
import pytest

from romswe.fom import State, rhs
from romswe.snapshots import (STATE_NAMES, collect, concatenate, load, save)


def test_collect_drops_initial_state(small_bundle):
    snaps = small_bundle["snaps"]
    traj = small_bundle["traj"]
    assert snaps.K == traj.K
    np.testing.assert_array_equal(snaps.W["h"][:, 0], traj.states[1].h)
    np.testing.assert_array_equal(snaps.initial, traj.states[0].stacked())


def test_collect_derivatives_are_rhs(small_bundle):
    snaps = small_bundle["snaps"]
    state = State(**{j: snaps.W[j][:, 3] for j in STATE_NAMES})
    F = State.from_stacked(rhs(state, small_bundle["params"],
                               small_bundle["ops"]))
    for j in STATE_NAMES:
        np.testing.assert_allclose(snaps.Wdot[j][:, 3], getattr(F, j))


def test_collect_stride(small_bundle):
    traj = small_bundle["traj"]
    snaps = collect(traj, small_bundle["params"], small_bundle["ops"],
                    stride=3)
    assert snaps.K == len(range(1, traj.K + 1, 3))
    np.testing.assert_array_equal(snaps.W["u"][:, 1], traj.states[4].u)


def test_collect_rejects_bad_stride(small_bundle):
    with pytest.raises(ValueError):
        collect(small_bundle["traj"], small_bundle["params"],
                small_bundle["ops"], stride=0)


def test_head_restricts_columns(small_bundle):
    snaps = small_bundle["snaps"]
    head = snaps.head(5)
    assert head.K == 5
    np.testing.assert_array_equal(head.W["v"], snaps.W["v"][:, :5])
    with pytest.raises(ValueError):
        snaps.head(snaps.K + 1)


def test_stacked_order(small_bundle):
    snaps = small_bundle["snaps"]
    W = snaps.stacked()
    N = snaps.N
    np.testing.assert_array_equal(W[:N], snaps.W["h"])
    np.testing.assert_array_equal(W[3 * N:], snaps.W["s"])


def test_concatenate_blocks(small_bundle):
    snaps = small_bundle["snaps"]
    both = concatenate([snaps, snaps.head(4)])
    assert both.W["h"].shape[1] == snaps.K + 4
    assert both.widths == [snaps.K, 4]


def test_save_load_roundtrip(small_bundle, tmp_path):
    snaps = small_bundle["snaps"]
    path = tmp_path / "snaps.bin"
    save(snaps, path)
    back = load(path)
    assert back.stride == snaps.stride
    assert back.mu is None
    for j in STATE_NAMES:
        np.testing.assert_array_equal(back.W[j], snaps.W[j])
        np.testing.assert_array_equal(back.Wdot[j], snaps.Wdot[j])
    np.testing.assert_array_equal(back.initial, snaps.initial)
