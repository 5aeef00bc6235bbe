"""Modelling toolkit for a floating tunable coupler between two transmons."""

from . import captools, errors, gatesim, hammod, netsim, noisemod, rbkit

__all__ = ["captools", "errors", "gatesim", "hammod", "netsim", "noisemod", "rbkit"]
__version__ = "0.1.0"
