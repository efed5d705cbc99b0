"""Quantised eddy currents induced by OAM-carrying electrons in a conducting tube."""
from .core_model import (CODATA2018, ElectronState, PhysicalConstants, Tube,
                         kinematics_from_energy, loop_model)
from .errors import ConfigError, ConvergenceError, DomainError

__version__ = "0.1.0"

__all__ = [
    "CODATA2018", "ElectronState", "PhysicalConstants", "Tube",
    "kinematics_from_energy", "loop_model",
    "ConfigError", "ConvergenceError", "DomainError",
]
