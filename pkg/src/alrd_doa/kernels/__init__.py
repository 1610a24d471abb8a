"""Scan kernels with a compiled path and a numpy fallback."""
import numpy as np

from .._jit import resolve_backend
from . import _numba, _numpy
from ._numba import AUX_SINGULAR, BASIS_SINGULAR, OK

STATUS_TAGS = {BASIS_SINGULAR: "basis-singular", AUX_SINGULAR: "aux-singular"}

_GRID = {
    ("alrd", "numba"): _numba.alrd_grid,
    ("alrd", "numpy"): _numpy.alrd_grid,
    ("malrd", "numba"): _numba.malrd_grid,
    ("malrd", "numpy"): _numpy.malrd_grid,
}


def run_grid(method, X, Ygrid, alpha, delta, delta_aux=None, backend=None):
    """Run ``method`` ("alrd" or "malrd") over every grid angle.

    ``X`` is (N, D, I) snapshot segments, ``Ygrid`` is (G, D, I) steering
    segments. Returns ``(power, status, basis_ops, aux_ops)`` per angle.
    """
    fn = _GRID[method, resolve_backend(backend)]
    X = np.ascontiguousarray(X, dtype=np.complex128)
    Ygrid = np.ascontiguousarray(Ygrid, dtype=np.complex128)
    delta_aux = delta if delta_aux is None else delta_aux
    return fn(X, Ygrid, float(alpha), float(delta), float(delta_aux))
