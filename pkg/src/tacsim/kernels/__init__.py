"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``TACSIM_DISABLE_NUMBA`` is unset (or ``0``). Both paths expose the
same functions with the same signatures; tests compare them directly.
"""

import os

from . import _numpy as numpy_impl

_DISABLED = os.environ.get("TACSIM_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

numba_impl = None
if not _DISABLED:
    try:
        from . import _numba as numba_impl
    except ImportError:  # pragma: no cover - numba missing
        numba_impl = None

BACKEND = "numba" if numba_impl is not None else "numpy"
_impl = numba_impl if numba_impl is not None else numpy_impl

correlate1d_valid = _impl.correlate1d_valid
pull_integrate = _impl.pull_integrate
lut_accumulate = _impl.lut_accumulate
lut_bilinear = _impl.lut_bilinear

__all__ = [
    "BACKEND",
    "correlate1d_valid",
    "lut_accumulate",
    "lut_bilinear",
    "numba_impl",
    "numpy_impl",
    "pull_integrate",
]
