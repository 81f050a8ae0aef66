"""Experiment configuration: flat key=value files plus CLI overrides.

Defaults reproduce the standard double-vortex studies; every value can be
overridden from a config file (``key = value`` lines, ``#`` comments) or
from command-line flags.
"""

import math
from dataclasses import dataclass, fields

DEFAULT_MU_RANGE = (4 * math.pi / 18, 8 * math.pi / 18)


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    # grid and scenario
    n: int = 32
    L: float = 5000e3
    H0: float = 750.0
    dh: float = 75.0
    g: float = 9.80616
    sigma_x: float = None          # defaults to 3L/40
    sigma_y: float = None
    ox: float = 0.1
    oy: float = 0.1
    # time discretization
    dt: float = 486.0
    steps: int = 250
    # Coriolis: direct value for the non-parametric studies, or a latitude
    # range with train/test counts for the parametric one
    f: float = 6.147e-5
    mu_min: float = DEFAULT_MU_RANGE[0]
    mu_max: float = DEFAULT_MU_RANGE[1]
    m_train: int = 6
    m_test: int = 7
    # reduction
    r_list: tuple = (5, 10, 20)
    stride: int = 1
    # regression drop tolerance; None selects it per reduced dimension by
    # validating candidate tolerances from lcurve_grid on the training window
    tol: float = None
    lcurve_grid: tuple = tuple(10.0 ** e for e in range(-14, 3))
    reprojection: bool = True
    # prediction study
    k_train_list: tuple = (120, 180)
    # bookkeeping
    seed: int = 0
    out: str = "out"

    def __post_init__(self):
        if self.sigma_x is None:
            self.sigma_x = 3.0 * self.L / 40.0
        if self.sigma_y is None:
            self.sigma_y = 3.0 * self.L / 40.0
        for name in ("L", "H0", "dh", "g", "sigma_x", "sigma_y", "dt"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.n < 3:
            raise ConfigError("grid size n must be at least 3")
        if self.steps < 1:
            raise ConfigError("steps must be at least 1")
        if self.stride < 1:
            raise ConfigError("stride must be at least 1")
        if not self.r_list or any(r < 1 for r in self.r_list):
            raise ConfigError("r_list must hold positive integers")
        if max(self.r_list) > self.n * self.n:
            raise ConfigError("reduced dimension exceeds the grid size")
        if not 0 < self.mu_min < self.mu_max < math.pi / 2:
            raise ConfigError("latitude range must satisfy "
                              "0 < mu_min < mu_max < pi/2")
        if self.m_train < 1 or self.m_test < 0:
            raise ConfigError("need m_train >= 1 and m_test >= 0")
        if any(k < 1 for k in self.k_train_list):
            raise ConfigError("k_train values must be positive")

    def as_dict(self) -> dict:
        out = {}
        for f_ in fields(self):
            value = getattr(self, f_.name)
            out[f_.name] = list(value) if isinstance(value, tuple) else value
        return out


_BOOL = {"true": True, "1": True, "yes": True, "on": True,
         "false": False, "0": False, "no": False, "off": False}


def _convert(name: str, text: str, target_type):
    text = text.strip()
    if target_type is tuple:
        parts = [p for p in text.replace(",", " ").split() if p]
        values = [float(p) for p in parts]
        return tuple(int(v) if v == int(v) and "e" not in p.lower() and "." not in p
                     else v for v, p in zip(values, parts))
    if target_type is bool:
        try:
            return _BOOL[text.lower()]
        except KeyError:
            raise ConfigError(f"{name}: expected a boolean, got {text!r}")
    if target_type is int:
        return int(text)
    if target_type is float:
        return float(text)
    return text


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines into typed override values."""
    types = {f_.name: (type(f_.default) if f_.default is not None else float)
             for f_ in fields(ExperimentConfig)}
    types.update(r_list=tuple, lcurve_grid=tuple, k_train_list=tuple,
                 sigma_x=float, sigma_y=float, out=str)
    overrides = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, "
                                  f"got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in types:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            overrides[key] = _convert(key, value, types[key])
    return overrides


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Build a config from defaults, an optional file, and keyword overrides."""
    values = {}
    if path is not None:
        values.update(parse_config_file(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)
