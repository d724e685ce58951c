"""Kernel backend selection.

The hot likelihood/score kernels exist twice: numba-compiled loops and a
pure-numpy fallback.  The environment variable ``CSCOX_BACKEND`` picks
one at import time (``numba`` is the default whenever numba imports;
set ``CSCOX_BACKEND=numpy`` to force the fallback).  ``benchmarks/``
compares the two.
"""

import os

from . import _kernels_numpy

BACKEND_ENV = "CSCOX_BACKEND"


def _select():
    choice = os.environ.get(BACKEND_ENV, "").strip().lower()
    if choice in ("numpy", "fallback"):
        return _kernels_numpy, "numpy"
    if choice not in ("", "numba"):
        raise ValueError(f"{BACKEND_ENV}={choice!r}: expected 'numba' or 'numpy'")
    try:
        from . import _kernels_numba
    except ImportError:
        if choice == "numba":
            raise
        return _kernels_numpy, "numpy"
    return _kernels_numba, "numba"


_impl, BACKEND = _select()

right_loglik_score = _impl.right_loglik_score
left_loglik_score = _impl.left_loglik_score
log1mexp = _kernels_numpy.log1mexp
