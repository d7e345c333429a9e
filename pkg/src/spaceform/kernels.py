"""Kernel dispatch: numba loop kernels or their numpy fallbacks.

The choice is made once at import time from ``SPACEFORM_DISABLE_NUMBA``.
"""
from __future__ import annotations

from . import _kernels_np
from ._jit import USE_NUMBA

if USE_NUMBA:
    from . import _kernels_nb as _impl
else:
    _impl = _kernels_np

BACKEND = "numba" if USE_NUMBA else "numpy"

element_orders = _impl.element_orders
closure = _impl.closure
closure_size_capped = _impl.closure_size_capped
index3_normal_cyclic = _impl.index3_normal_cyclic
noncyclic_qp_witness = _impl.noncyclic_qp_witness
spherical_witness = _impl.spherical_witness
pair_distances = _impl.pair_distances
extent_ascent = _impl.extent_ascent
max_quadratic = _impl.max_quadratic
maximin_ascent = _impl.maximin_ascent

# vectorized helpers used outside the hot loops, regardless of backend
mul = _kernels_np.mul
inv = _kernels_np.inv
conj = _kernels_np.conj
lens_cos = _kernels_np.lens_cos
lens_dist = _kernels_np.lens_dist
