"""Numerical laboratory for frozen quantum coherence under local incoherent noise."""

__version__ = "0.1.0"
