"""Numerical verification of local gauge invariance for SU(n) x SU(m) kinetic Lagrangians."""

__version__ = "0.1.0"
