"""Coined quantum walks with the walker encoded in one qubit's polarization."""

__version__ = "0.1.0"
