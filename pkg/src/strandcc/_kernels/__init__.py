"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is picked per call from the ``STRANDCC_BACKEND`` environment
variable (``numba`` or ``numpy``).  Without the variable, numba is used when
it imports cleanly.  Both backends expose the same four functions:

``pair_inductance(positions, r_strd, l_cond)``
    Dense per-slot inductance matrix from conductor coordinates.
``congruence_sum(strand_of, sign, mats, nsh)``
    ``sum_i M_i^T X_i M_i`` for signed incidence maps stored row-wise.
``solve_batched(A, B)``
    LU solve of a stack of complex systems plus 1-norm condition numbers.
``reconstruct(currents, orders, phase)``
    Time samples ``sqrt(2) * sum_k Re(I_k exp(j k phase))``.
"""

import os
import warnings

from . import _numpy

ENV_VAR = "STRANDCC_BACKEND"
BACKENDS = ("numba", "numpy")

_numba_module = None
_numba_failed = False


def _load_numba():
    global _numba_module, _numba_failed
    if _numba_module is None and not _numba_failed:
        try:
            from . import _numba
        except ImportError:
            _numba_failed = True
            warnings.warn("numba not importable; using the numpy kernels")
        else:
            _numba_module = _numba
    return _numba_module


def backend_name():
    """Name of the backend the next kernel call will use."""
    requested = os.environ.get(ENV_VAR, "").strip().lower()
    if requested and requested not in BACKENDS:
        raise ValueError(f"{ENV_VAR} must be one of {BACKENDS}, got {requested!r}")
    if requested == "numpy":
        return "numpy"
    if _load_numba() is None:
        if requested == "numba":
            raise ImportError(f"{ENV_VAR}=numba but numba is not importable")
        return "numpy"
    return "numba"


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: environment choice)."""
    name = backend_name() if name is None else name
    if name == "numpy":
        return _numpy
    if name == "numba":
        mod = _load_numba()
        if mod is None:
            raise ImportError("numba backend requested but numba is not importable")
        return mod
    raise ValueError(f"unknown backend {name!r}")


def pair_inductance(positions, r_strd, l_cond):
    return get_backend().pair_inductance(positions, r_strd, l_cond)


def congruence_sum(strand_of, sign, mats, nsh):
    return get_backend().congruence_sum(strand_of, sign, mats, nsh)


def solve_batched(A, B):
    return get_backend().solve_batched(A, B)


def reconstruct(currents, orders, phase):
    return get_backend().reconstruct(currents, orders, phase)
