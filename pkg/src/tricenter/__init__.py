"""Numerical laboratory for the spatial problem of three fixed centers."""

__version__ = "0.1.0"
