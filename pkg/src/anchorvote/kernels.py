"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise (or when
``ANCHORVOTE_PURE_PYTHON`` is set) the numpy/pure-Python fallback is used.
Both expose ``positional_outcome``, ``level_set_counts`` and ``nearest_index``.
"""
import os

from anchorvote import _kernels_py

try:
    if os.environ.get("ANCHORVOTE_PURE_PYTHON"):
        raise ImportError("pure-Python backend forced by environment")
    from anchorvote import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"

positional_outcome = _impl.positional_outcome
level_set_counts = _impl.level_set_counts
nearest_index = _impl.nearest_index


def backends():
    """Mapping of available backend name -> module, for tests and benchmarks."""
    found = {"python": _kernels_py}
    try:
        from anchorvote import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
