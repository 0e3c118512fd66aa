"""Hot-kernel backend selection.

Imports the compiled Cython kernels when the extension was built, otherwise
falls back to the pure-Python reference implementations.  Set the
environment variable ``FAMP_PURE_PYTHON=1`` to force the fallback (used by
the backend-agreement tests and the benchmark).
"""

import os

from . import _pyref

if os.environ.get("FAMP_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _pyref
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _pyref

BACKEND = _impl.BACKEND
rollout_columns = _impl.rollout_columns
detent_force = _impl.detent_force
sim_control_window = _impl.sim_control_window


def backend_name():
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return BACKEND
