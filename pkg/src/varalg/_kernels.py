"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it is importable; set
``VARALG_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from varalg import _pykernels

BACKEND = "python"
jacobi_eigh = _pykernels.jacobi_eigh
grid_local_minima = _pykernels.grid_local_minima

if not os.environ.get("VARALG_PURE_PYTHON"):
    try:
        from varalg import _ckernels
    except ImportError:  # extension not built
        _ckernels = None
    if _ckernels is not None:
        BACKEND = "cython"
        jacobi_eigh = _ckernels.jacobi_eigh
        grid_local_minima = _ckernels.grid_local_minima


def available_backends():
    """Map backend name -> kernel module, for benchmarks and tests."""
    out = {"python": _pykernels}
    try:
        from varalg import _ckernels as ck
    except ImportError:
        return out
    out["cython"] = ck
    return out
