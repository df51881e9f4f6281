"""Backend selection for the time-stepping kernels.

The compiled Cython extension `inlslab._core` implements the inner loop of
the relaxation Crank-Nicolson stepper (complex Thomas solve fused with the
potential relaxation).  A pure NumPy/SciPy implementation with the same API
is used when the extension is missing or when the environment variable
INLSLAB_PURE_PYTHON=1 requests it (handy for benchmarking the two paths).
"""
from __future__ import annotations

import os

if os.environ.get("INLSLAB_PURE_PYTHON", "") == "1":
    from . import _core_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _core_py as _impl

        BACKEND = "python"

tridiag_solve = _impl.tridiag_solve
relaxation_steps = _impl.relaxation_steps
