"""Numba switch.

Hot kernels are compiled with numba unless ``SPACEFORM_DISABLE_NUMBA`` is set
to a truthy value (or numba cannot be imported), in which case the
vectorized numpy implementations in :mod:`spaceform._kernels_np` are used.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("SPACEFORM_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(fn):
    """Compile ``fn`` in nopython mode when numba is importable, else return it."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
