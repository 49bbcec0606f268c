"""Exact finite-depth constructions for weighted badly approximable vectors in the unit square."""

__version__ = "0.1.0"
