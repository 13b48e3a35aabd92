"""Backend selection for the chart kernels.

``SILVA_BACKEND=numba`` (default) runs the compiled kernel; ``SILVA_BACKEND=numpy``
forces the vectorised numpy path. Without numba installed the numpy path is used.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def _requested_backend():
    value = os.environ.get("SILVA_BACKEND", "numba").strip().lower()
    if value not in BACKENDS:
        raise ValueError(f"SILVA_BACKEND must be one of {BACKENDS}, got {value!r}")
    return value


BACKEND = _requested_backend() if HAVE_NUMBA else "numpy"


def njit(*args, **kwargs):
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def resolve_backend(backend=None):
    backend = BACKEND if backend is None else backend
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend
