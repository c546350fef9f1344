"""Hybrid simulation and calibration of a foldable electromechanical relaxation oscillator."""

from .config import ConfigError, SimConfig, Violation, validate
from .integrator import ChatteringError, SimulationDiverged, SimulationError, SnapEvent, Trace, resample, simulate
from .model import (
    ActuatorParams,
    ActuatorState,
    BeamModel,
    BeamSide,
    CircuitModel,
    CoolingMode,
    Environment,
)

__version__ = "0.1.0"
