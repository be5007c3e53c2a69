"""Poisson and symplectic structures on coordinate charts, with structure-preserving integrators."""

__version__ = "0.1.0"
