"""Farthest points in intersections of equal-radius balls.

The main entry points are :func:`ballmax.solver.solve` for a single
instance, :mod:`ballmax.ssp` for the Subset Sum embedding and
:mod:`ballmax.oracle` for brute-force cross-checks.
"""

from .errors import BallmaxError, InconclusiveError, ScaleGuardError, ValidationError
from .geometry import BallSystem, Instance
from .solver import SolveReport, solve

__all__ = [
    "BallSystem",
    "Instance",
    "SolveReport",
    "solve",
    "BallmaxError",
    "ValidationError",
    "ScaleGuardError",
    "InconclusiveError",
]
