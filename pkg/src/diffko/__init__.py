"""Exact computer algebra for KO-theory and differential KO-theory."""

__version__ = "0.1.0"
