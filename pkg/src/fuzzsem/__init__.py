"""Semantic detection of fuzzing impact in 5G stack run-time logs."""

__version__ = "0.1.0"
