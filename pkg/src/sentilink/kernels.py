"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when it
is not built or when ``SENTILINK_PURE_PYTHON`` is set to a non-empty,
non-"0" value before import.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("SENTILINK_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

sparse_forward = _impl.sparse_forward
sparse_weight_grad = _impl.sparse_weight_grad
weighted_residual = _impl.weighted_residual


def backend_module(name: str):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
