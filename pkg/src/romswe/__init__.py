"""Reduced-order modeling toolkit for the rotating thermal shallow water
equations: a structure-preserving finite-difference full-order solver, an
intrusive Galerkin reduced model, and a non-intrusive learned reduced model
with re-projection sampling."""

__version__ = "0.1.0"

from .config import ConfigError, ExperimentConfig, load_config
from .fom import (ConservedQuantities, PhysicalParams, State, Trajectory,
                  VortexScenario, conserved_quantities, coriolis,
                  double_vortex_initial, jacobian, kahan_step, rhs, simulate)
from .galerkin import GalerkinRom, assemble
from .grid import DiffOperators, Grid, build_diff_2d, build_periodic_diff_1d
from .opinf import OpInfRom, infer_operators, reproject
from .pod import PodBasis, pod_basis, randomized_svd
from .reduced import ReducedModel
from .regression import lcurve_scan, min_norm_lstsq
from .snapshots import GlobalSnapshots, SnapshotSet, collect, concatenate

__all__ = [
    "ConservedQuantities", "PhysicalParams", "State", "Trajectory",
    "VortexScenario", "conserved_quantities", "coriolis",
    "double_vortex_initial", "jacobian", "kahan_step", "rhs", "simulate",
    "GalerkinRom", "assemble", "DiffOperators", "Grid", "build_diff_2d",
    "build_periodic_diff_1d", "OpInfRom", "infer_operators", "reproject",
    "PodBasis", "pod_basis", "randomized_svd", "ReducedModel", "lcurve_scan",
    "min_norm_lstsq", "GlobalSnapshots", "SnapshotSet", "collect",
    "concatenate", "ConfigError", "ExperimentConfig", "load_config",
]
