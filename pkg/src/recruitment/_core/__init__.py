"""Numerical core: lattice retirement DP and the Monte Carlo trial loop.

The compiled extension is used when it was built; set
``RECRUITMENT_PURE_PYTHON=1`` to force the pure-Python twins.
"""
import os

from . import _fallback

if os.environ.get("RECRUITMENT_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

Lattice = _impl.Lattice
simulate = _impl.simulate

__all__ = ["BACKEND", "Lattice", "simulate"]
