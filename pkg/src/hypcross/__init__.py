"""Sparse-spectral tools for step-hyperbolic cross approximation on the torus."""

__version__ = "0.1.0"
