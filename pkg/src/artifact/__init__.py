"""Executable calculators and simulators for reliability, adaptation, grounding and trust bounds."""

__version__ = "0.1.0"
