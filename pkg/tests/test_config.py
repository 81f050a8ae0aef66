"""Configuration parsing and validation tests."""

import math

import pytest

from romswe.config import ConfigError, ExperimentConfig, load_config


def test_defaults_are_valid():
    cfg = ExperimentConfig()
    assert cfg.sigma_x == pytest.approx(3 * cfg.L / 40)
    assert cfg.f == pytest.approx(6.147e-5)
    assert cfg.mu_min == pytest.approx(4 * math.pi / 18)


def test_validation_errors():
    with pytest.raises(ConfigError):
        ExperimentConfig(n=2)
    with pytest.raises(ConfigError):
        ExperimentConfig(dt=-1.0)
    with pytest.raises(ConfigError):
        ExperimentConfig(r_list=(0, 5))
    with pytest.raises(ConfigError):
        ExperimentConfig(n=4, r_list=(100,))
    with pytest.raises(ConfigError):
        ExperimentConfig(mu_min=1.0, mu_max=0.5)
    with pytest.raises(ConfigError):
        ExperimentConfig(stride=0)


def test_config_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# comment\n"
        "n = 24\n"
        "steps = 100   # trailing comment\n"
        "r_list = 3, 6\n"
        "reprojection = false\n"
        "out = results\n")
    cfg = load_config(path)
    assert cfg.n == 24
    assert cfg.steps == 100
    assert cfg.r_list == (3, 6)
    assert cfg.reprojection is False
    assert cfg.out == "results"


def test_cli_overrides_beat_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("n = 24\nseed = 5\n")
    cfg = load_config(path, n=48)
    assert cfg.n == 48
    assert cfg.seed == 5


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("nope = 3\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_malformed_line_rejected(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("just some words\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_as_dict_roundtrip():
    cfg = ExperimentConfig(r_list=(4, 8))
    d = cfg.as_dict()
    assert d["r_list"] == [4, 8]
    assert d["n"] == cfg.n
