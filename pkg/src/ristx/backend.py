"""Numba/NumPy backend selection for the hot Monte Carlo kernels.

The JIT path is on by default. Set the environment variable
``RISTX_DISABLE_NUMBA=1`` before import to force the pure-NumPy fallback
(e.g. on platforms without a working numba install, or to compare the
two paths with ``benchmarks/bench_mc.py``).
"""

import os

_FLAG = "RISTX_DISABLE_NUMBA"

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def numba_disabled_by_env() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() in ("1", "true", "yes")


NUMBA_ENABLED = HAVE_NUMBA and not numba_disabled_by_env()


def default_backend() -> str:
    """Backend name used when callers pass backend='auto'."""
    return "numba" if NUMBA_ENABLED else "numpy"


def resolve_backend(backend: str) -> str:
    """Validate a backend request against what is available."""
    if backend == "auto":
        return default_backend()
    if backend == "numpy":
        return "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return "numba"
    raise ValueError(f"unknown backend {backend!r}; expected 'auto', 'numpy' or 'numba'")
