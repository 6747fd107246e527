"""Absolute convergence factors for general Fourier series of Lip1 functions."""

__version__ = "0.1.0"
