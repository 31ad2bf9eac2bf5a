"""Pseudospectral simulation and verification toolkit for the fifth-order KdV-BBM equation."""

__version__ = "0.1.0"

from .model import ModelParams, analytic_datum, energy_E, energy_E_sigma, nonlinearity_F
from .solver import SolverConfig, Trajectory, evolve, local_timespan, picard_iterate
from .spectral import GevreyParams, SpectralField, SpectralGrid, make_grid

__all__ = [
    "GevreyParams",
    "ModelParams",
    "SolverConfig",
    "SpectralField",
    "SpectralGrid",
    "Trajectory",
    "analytic_datum",
    "energy_E",
    "energy_E_sigma",
    "evolve",
    "local_timespan",
    "make_grid",
    "nonlinearity_F",
    "picard_iterate",
]
