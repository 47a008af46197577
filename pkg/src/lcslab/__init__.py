"""Numerical verification engine for (LCS)_n-manifolds and their submanifolds."""

__version__ = "0.1.0"
