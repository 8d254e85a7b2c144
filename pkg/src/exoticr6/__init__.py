"""Exact verification engine for an explicit exotic symplectic structure on R^6."""

__version__ = "0.1.0"
