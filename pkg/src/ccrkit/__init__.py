"""Pulse-level simulation and analysis toolkit for cross-cross resonance gates."""

__version__ = "0.1.0"
