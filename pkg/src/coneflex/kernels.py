"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise (or when the
environment variable ``CONEFLEX_PURE_PYTHON=1`` is set) the pure-Python
reference implementation is used.  ``BACKEND`` names the active one.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("CONEFLEX_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

meridian_scan = _impl.meridian_scan
pairwise_segment_cosh_min = _impl.pairwise_segment_cosh_min
segment_cosh_min_gram = _impl.segment_cosh_min_gram


def _gram(u1, w1, u2, w2):
    def md(x, y):
        return -x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3]
    return md(u1, u2), md(u1, w2), md(w1, u2), md(w1, w2)


def segment_cosh_min(u1, w1, l1, u2, w2, l2, tol=1e-10):
    """Minimum of ``cosh`` distance between two arclength-parametrised segments."""
    g = _gram(np.asarray(u1, float), np.asarray(w1, float), np.asarray(u2, float), np.asarray(w2, float))
    c, s, t = segment_cosh_min_gram(*g, float(l1), float(l2), tol)
    return float(c), float(s), float(t)
