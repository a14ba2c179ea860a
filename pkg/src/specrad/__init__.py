"""Spectral radius laboratory for inhomogeneous non-Hermitian random matrices."""
