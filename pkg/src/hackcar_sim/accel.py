"""Numba acceleration switch for the hot kernels.

Kernels decorated with :func:`maybe_njit` are compiled with numba when it is
installed. Setting ``HACKCAR_SIM_NO_NUMBA=1`` (or running without numba)
selects the plain Python/numpy fallback path instead; both paths run the
same source.
"""

import os

NO_NUMBA_ENV = "HACKCAR_SIM_NO_NUMBA"

_DISABLED = os.environ.get(NO_NUMBA_ENV, "").strip().lower() in ("1", "true", "yes")

USING_NUMBA = False
if not _DISABLED:
    try:
        from numba import njit as _njit

        USING_NUMBA = True
    except ImportError:
        pass


def maybe_njit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if USING_NUMBA:
        return _njit(cache=True)(func)
    return func
