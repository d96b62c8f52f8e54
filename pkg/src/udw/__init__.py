"""Finite-time Unruh--DeWitt detector laboratory."""

__version__ = "0.1.0"
