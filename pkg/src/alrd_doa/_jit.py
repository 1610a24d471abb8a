"""Backend selection for the hot scan kernels.

Setting ``ALRD_DOA_DISABLE_JIT=1`` in the environment (or running without
numba installed) routes every scan through the pure-numpy kernels, which are
vectorised across the angle grid instead of compiled per angle.
"""
import os

try:
    import numba
    from numba import njit, prange

    # prefer OpenMP/workqueue over TBB, which may be present but too old
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range


def _flag(name):
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


def default_backend():
    """Return ``"numba"`` or ``"numpy"`` according to the environment."""
    if _flag("ALRD_DOA_DISABLE_JIT") or not HAVE_NUMBA:
        return "numpy"
    return "numba"


def resolve_backend(backend=None):
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}; expected 'numba' or 'numpy'")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def set_threads(n):
    """Set the numba thread pool size; ``0`` keeps numba's default."""
    if HAVE_NUMBA and n and n > 0:
        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))
