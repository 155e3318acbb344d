"""Coined quantum walks on a ring with a sink: trapping and dynamical percolation."""

__version__ = "0.1.0"
