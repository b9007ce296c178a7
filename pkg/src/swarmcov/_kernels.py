"""Backend selection for the basis-evaluation kernels.

The compiled Cython extension is used when importable; otherwise the numpy
fallback. Set SWARMCOV_PURE_PYTHON=1 to force the fallback (used by the
benchmark and by tests that compare the two backends).
"""

import os

from swarmcov import _kernels_py

if os.environ.get("SWARMCOV_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from swarmcov import _kernels_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

basis_block = _impl.basis_block
basis_grad_block = _impl.basis_grad_block
weighted_grad_sum = _impl.weighted_grad_sum
traj_coeffs = _impl.traj_coeffs


def backend_name() -> str:
    return BACKEND
