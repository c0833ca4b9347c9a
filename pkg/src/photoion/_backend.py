"""Selects the Fock-kernel implementation at import time.

The compiled extension is preferred; the numpy fallback is bit-compatible.
Set PHOTOION_FORCE_PY_KERNELS=1 to force the fallback (used by the benchmark
and the backend-equivalence tests).
"""
import os

from . import _kernels_py

if os.environ.get("PHOTOION_FORCE_PY_KERNELS") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

enumerate_states = _impl.enumerate_states
creation_tables = _impl.creation_tables
