"""Backend selection for the hot kernels.

The environment variable ``YMHS_BACKEND`` picks the implementation:

* unset or ``numba`` -- use the numba-compiled kernels (falls back to
  numpy silently only when unset and numba cannot be imported),
* ``numpy``          -- force the pure-numpy reference kernels.

Both backends are importable directly (``numpy_backend`` /
``numba_backend``) for consistency tests and benchmarks.
"""

import os

from . import numpy_backend

_requested = os.environ.get("YMHS_BACKEND", "").strip().lower()

if _requested == "numpy":
    _impl = numpy_backend
elif _requested in ("", "numba"):
    try:
        from . import numba_backend as _impl
    except ImportError:
        if _requested == "numba":
            raise
        _impl = numpy_backend
else:
    raise RuntimeError(
        f"YMHS_BACKEND={_requested!r} not recognized (use 'numba' or 'numpy')")

BACKEND = _impl.NAME

central_diff = _impl.central_diff
codiff_oneform = _impl.codiff_oneform
grad_scalar = _impl.grad_scalar
cov_deriv_raw = _impl.cov_deriv_raw
ymh_gradient = _impl.ymh_gradient

# pointwise helpers are vectorized numpy in both backends
cross = numpy_backend.cross
cross_e3 = numpy_backend.cross_e3
dot = numpy_backend.dot
tangent_project = numpy_backend.tangent_project
