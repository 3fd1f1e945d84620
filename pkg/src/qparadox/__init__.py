"""Quantum fixed points for classically paradoxical signalling loops."""

__version__ = "0.1.0"
