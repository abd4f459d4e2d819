"""Synthetic tactile grip-stability data: contact rendering, pull simulation,
friction calibration and image metrics."""

from .errors import CalibrationError, FitError, GeometryError, TacsimError, UnreachableVolumeError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CalibrationError",
    "FitError",
    "GeometryError",
    "TacsimError",
    "UnreachableVolumeError",
]
