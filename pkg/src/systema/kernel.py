"""Select the compiled kernel when it is importable, else the pure-Python one.

Set ``SYSTEMA_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from systema import _kernel_py

try:
    if os.environ.get("SYSTEMA_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure Python requested")
    from systema import _ckernel as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _kernel_py
    BACKEND = "python"

interleavings = _impl.interleavings
interleave_sets = _impl.interleave_sets
explore = _impl.explore

SEND = _kernel_py.SEND
RECV = _kernel_py.RECV


def backends() -> dict:
    """Every importable backend, keyed by name."""
    found = {"python": _kernel_py}
    try:
        from systema import _ckernel

        found["cython"] = _ckernel
    except ImportError:
        pass
    return found
