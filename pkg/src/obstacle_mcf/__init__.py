"""Finite-difference Allen-Cahn dynamics for the obstacle potential and its Yosida
regularization, with energy, discrepancy and monotonicity diagnostics."""
from .errors import (
    BlowUpError,
    ConfigError,
    EmptyContourError,
    ExtinctError,
    KernelTooCloseError,
    MarginError,
    ObstacleMCFError,
    StabilityError,
)
from .grid import Grid
from .initial_data import Annulus, Sphere, TwoSpheres, build_initial_field
from .kernels import BACKEND
from .potential import ObstacleParam, ProfileParam, f_delta, phi_transform, sigma_delta
from .solver import PROJECTION, YOSIDA, PhaseState, Simulation, SolverConfig, run, stability_limit

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Annulus", "BlowUpError", "ConfigError", "EmptyContourError", "ExtinctError",
    "Grid", "KernelTooCloseError", "MarginError", "ObstacleMCFError", "ObstacleParam",
    "PROJECTION", "PhaseState", "ProfileParam", "Simulation", "SolverConfig", "Sphere",
    "StabilityError", "TwoSpheres", "YOSIDA", "build_initial_field", "f_delta",
    "phi_transform", "run", "sigma_delta", "stability_limit",
]
