"""Hot-loop kernels, compiled when available.

The Cython extension ``_core`` is used if it was built and importable;
otherwise the numpy versions in ``_fallback`` are used. Set
``CLUSTERFLOW_PURE=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("CLUSTERFLOW_PURE") != "1":
    try:
        from . import _core as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

tentative_gaps = _impl.tentative_gaps
fold = _impl.fold
reverse_expand = _impl.reverse_expand
sum_squares_exact = _impl.sum_squares_exact

__all__ = [
    "BACKEND",
    "tentative_gaps",
    "fold",
    "reverse_expand",
    "sum_squares_exact",
]
