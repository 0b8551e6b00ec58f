"""Magnetic Neumann Laplacian eigenvalues on planar domains, with bound checks."""

__version__ = "0.1.0"
