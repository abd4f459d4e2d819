"""Exception hierarchy. The CLI maps these onto exit codes."""


class TacsimError(Exception):
    """Base class for all package errors."""


class GeometryError(TacsimError, ValueError):
    """Invalid shape parameters or grid."""


class UnreachableVolumeError(TacsimError):
    """Target penetration volume cannot be reached within the depth bracket."""


class CalibrationError(TacsimError):
    """Optical or penetration calibration failed."""


class FitError(TacsimError):
    """Least-squares fit is singular or produced an unphysical correction."""
