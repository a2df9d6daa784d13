"""Numba backend selection.

The Monte Carlo kernels ship in two functionally identical flavours: a
scalar loop compiled with numba and a vectorised pure-numpy fallback.  Both
consume the same pre-drawn uniform blocks, so switching backends changes
speed, never results.  Selection order:

* ``ENTVERIFY_DISABLE_NUMBA=1`` in the environment forces the numpy path;
* otherwise numba is used when importable.
"""

from __future__ import annotations

import os

NUMBA_DISABLE = os.environ.get("ENTVERIFY_DISABLE_NUMBA", "").lower() in (
    "1",
    "true",
    "yes",
)

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not NUMBA_DISABLE


def njit(func):
    """Compile with numba when enabled, otherwise return the function as is.

    The undecorated function stays importable either way, which keeps the
    scalar reference path testable against the vectorised one.
    """
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
