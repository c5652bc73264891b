"""Sparse subspace clustering with outlier detection and geometric certificates."""

__version__ = "0.1.0"
