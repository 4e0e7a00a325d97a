"""Bound states of the stationary 1D Gross-Pitaevskii equation."""

__version__ = "0.1.0"
