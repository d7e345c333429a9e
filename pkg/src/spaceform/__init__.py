"""Computational companion for spherical 5-space forms: metacyclic groups,
their free linear actions, lens-space extents and linear torus actions."""
from __future__ import annotations

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
