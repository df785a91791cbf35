"""Execution-backend selection for the numerical hot paths.

The kernel-evaluation primitives and the coupled-system integration loop
are written once as plain Python functions operating on NumPy arrays.  By
default they are compiled with numba's nopython JIT (``cache=True`` so
compilation cost is paid once per environment, ``nogil=True`` so sweep
workers can run them in parallel threads).

Setting the environment variable ``RKHS_ADAPT_BACKEND=numpy`` before
import skips compilation and runs the very same source as pure Python.
That path is slower but has no compiled dependency, and is what the
backend benchmark compares against.

Attributes
----------
BACKEND : str
    Resolved backend name, ``"numba"`` or ``"numpy"``.
jit : callable
    Decorator applied to every hot-path function.
"""

import os
import warnings

_ENV_VAR = "RKHS_ADAPT_BACKEND"
_requested = os.environ.get(_ENV_VAR, "numba").strip().lower()

if _requested not in ("numba", "numpy"):
    raise ValueError(
        f"{_ENV_VAR} must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numba":
    try:
        from numba import njit as _njit

        BACKEND = "numba"

        def jit(func):
            return _njit(cache=True, nogil=True)(func)

    except ImportError:  # pragma: no cover - exercised only without numba
        warnings.warn(
            "numba is not importable; falling back to the pure-NumPy backend",
            RuntimeWarning,
            stacklevel=2,
        )
        BACKEND = "numpy"

        def jit(func):
            return func

else:
    BACKEND = "numpy"

    def jit(func):
        return func
