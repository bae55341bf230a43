"""Infinitesimal flexibility of polyhedra and hyperbolic cone-manifolds."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
