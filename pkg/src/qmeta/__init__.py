"""Simulation of a one-dimensional qubit-loaded transmission line."""

from .model import (
    LatticeLayout,
    MediumParams,
    PhysicalParams,
    QubitParams,
    SimState,
    chi_expectation,
    default_params,
    derive_medium,
)
from .pulses import PulseSpec, add_pulse, check_validity, synthesize

__version__ = "0.1.0"

__all__ = [
    "LatticeLayout",
    "MediumParams",
    "PhysicalParams",
    "QubitParams",
    "SimState",
    "chi_expectation",
    "default_params",
    "derive_medium",
    "PulseSpec",
    "add_pulse",
    "check_validity",
    "synthesize",
]
