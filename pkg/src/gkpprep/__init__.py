"""Qubit-assisted preparation of approximate GKP states in an oscillator."""

__version__ = "0.1.0"
