"""Compositional roots of compositions of generalized Hénon maps."""

__version__ = "0.1.0"
