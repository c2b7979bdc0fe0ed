"""Optional numba acceleration for the hot simulation kernels.

Every kernel exists twice: a loop version compiled with numba and a
vectorized numpy version. Setting ``QBENCH_NO_NUMBA=1`` (or running without
numba installed) selects the numpy versions.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("QBENCH_NO_NUMBA", "").strip().lower()
DISABLED = _FLAG in {"1", "true", "yes", "on"}

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if _numba is None:
        return func
    return _numba.njit(cache=True, nogil=True)(func)


def backend_name() -> str:
    return "numba" if _active["numba"] else "numpy"


_active = {"numba": USE_NUMBA}


def numba_active() -> bool:
    return _active["numba"]


def set_backend(name: str) -> None:
    """Switch kernels at runtime (used by tests and the benchmark script)."""
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not installed")
        _active["numba"] = True
    elif name == "numpy":
        _active["numba"] = False
    else:
        raise ValueError(f"unknown backend {name!r}")
