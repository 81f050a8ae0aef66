"""CLI and experiment-harness tests at tiny scale."""

import csv
import filecmp
import json

import pytest

from romswe.cli import main

TINY = ["--grid", "12", "--steps", "10", "--seed", "1"]


def _run(args):
    return main(args)


def test_fom_outputs(tmp_path):
    out = tmp_path / "fom"
    assert _run(["fom", *TINY, "--out", str(out)]) == 0
    for name in ("snapshots.bin", "conserved_series.csv",
                 "conserved_series.png", "summary.json", "config.json"):
        assert (out / name).exists(), name
    with open(out / "conserved_series.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["time", "energy", "mass", "vorticity", "buoyancy"]
    assert len(rows) == 12  # header + K+1 states


def test_config_sidecar_reflects_overrides(tmp_path):
    out = tmp_path / "fom"
    assert _run(["fom", *TINY, "--out", str(out)]) == 0
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["n"] == 12
    assert cfg["steps"] == 10
    assert cfg["seed"] == 1
    assert cfg["study"] == "fom"


def test_pod_from_stored_snapshots(tmp_path):
    fom_out = tmp_path / "fom"
    assert _run(["fom", *TINY, "--out", str(fom_out)]) == 0
    pod_out = tmp_path / "pod"
    assert _run(["pod", *TINY, "--r", "2,3", "--out", str(pod_out),
                 "--snapshots", str(fom_out / "snapshots.bin")]) == 0
    assert (pod_out / "basis.bin").exists()
    assert (pod_out / "singular_values.csv").exists()


@pytest.mark.filterwarnings("ignore")
def test_nonparametric_deterministic_rerun(tmp_path):
    args = ["nonparametric", *TINY, "--r", "2,3"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert _run([*args, "--out", str(out1)]) == 0
    assert _run([*args, "--out", str(out2)]) == 0
    for name in ("errors_vs_r.csv", "invariant_errors.csv",
                 "conserved_series.csv", "singular_values.csv"):
        assert filecmp.cmp(out1 / name, out2 / name, shallow=False), name


@pytest.mark.filterwarnings("ignore")
def test_nonparametric_emits_figures(tmp_path):
    out = tmp_path / "np"
    assert _run(["nonparametric", *TINY, "--r", "2", "--out", str(out)]) == 0
    for name in ("errors_vs_r.png", "conserved_series.png",
                 "singular_values.png"):
        assert (out / name).exists(), name


@pytest.mark.filterwarnings("ignore")
def test_prediction_invalid_window_fails(tmp_path, capsys):
    out = tmp_path / "pred"
    code = _run(["prediction", *TINY, "--r", "2", "--k-train", "10",
                 "--out", str(out)])
    assert code == 1
    assert "failed" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore")
def test_prediction_outputs(tmp_path):
    out = tmp_path / "pred"
    assert _run(["prediction", *TINY, "--r", "2", "--k-train", "6",
                 "--out", str(out)]) == 0
    with open(out / "prediction_averages.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["k_train", "r", "rom"]
    assert len(rows) == 3  # header + galerkin + opinf
    with open(out / "prediction_series.csv") as fh:
        phases = {row[4] for row in list(csv.reader(fh))[1:]}
    assert phases == {"train", "predict"}


@pytest.mark.filterwarnings("ignore")
def test_parametric_tiny(tmp_path):
    out = tmp_path / "par"
    assert _run(["parametric", "--grid", "10", "--steps", "8", "--seed", "2",
                 "--r", "2", "--out", str(out)]) == 0
    with open(out / "parametric_errors.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "rom", "rel_avg_error_train",
                       "rel_avg_error_test"]
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["mus_train"]) == 6
    assert len(summary["mus_test"]) == 7
    assert (out / "final_fields.bin").exists()


@pytest.mark.filterwarnings("ignore")
def test_parametric_seed_changes_test_set_only(tmp_path):
    from romswe.config import ExperimentConfig
    from romswe.experiments import parametric_sets

    a = parametric_sets(ExperimentConfig(seed=1))
    b = parametric_sets(ExperimentConfig(seed=2))
    assert a[0] == b[0]          # equidistant training latitudes
    assert a[2] != b[2]          # random test latitudes move with the seed


@pytest.mark.filterwarnings("ignore")
def test_lcurve_outputs(tmp_path):
    out = tmp_path / "lc"
    assert _run(["lcurve", *TINY, "--r", "2", "--out", str(out)]) == 0
    for eq in "huvs":
        with open(out / f"lcurve_{eq}.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["tol", "residual_norm", "solution_norm", "corner"]
        assert len(rows) > 3
    assert (out / "data_matrix_spectra.csv").exists()


def test_bad_config_file_is_reported(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nope = 1\n")
    code = _run(["fom", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore")
def test_no_reprojection_flag(tmp_path):
    out = tmp_path / "np"
    assert _run(["nonparametric", *TINY, "--r", "2", "--no-reprojection",
                 "--out", str(out)]) == 0
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["reprojection"] is False


def test_threads_env_cap(monkeypatch):
    from romswe.experiments import worker_count

    monkeypatch.setenv("ROMSWE_THREADS", "1")
    assert worker_count() == 1
    monkeypatch.setenv("ROMSWE_THREADS", "bogus")
    with pytest.raises(ValueError):
        worker_count()
