"""Backend selection for the integration kernels.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``ROBE3BP_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the pure-Python implementation is used.  Both expose
``integrate_robe`` and ``integrate_linear`` with identical behaviour.
"""

import os

from . import _pykernels

STATUS_OK = _pykernels.STATUS_OK
STATUS_SINGULAR = _pykernels.STATUS_SINGULAR
STATUS_UNDERFLOW = _pykernels.STATUS_UNDERFLOW
STATUS_MAX_STEPS = _pykernels.STATUS_MAX_STEPS

_force_python = os.environ.get("ROBE3BP_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_python:
        raise ImportError("pure-Python backend requested")
    from . import _ckernels as _backend
    BACKEND = "cython"
except ImportError:
    _backend = _pykernels
    BACKEND = "python"

integrate_robe = _backend.integrate_robe
integrate_linear = _backend.integrate_linear


def get_backend(name=None):
    """Return the kernel module for ``name`` (``"cython"``/``"python"``) or the active one."""
    if name is None:
        return _backend
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
