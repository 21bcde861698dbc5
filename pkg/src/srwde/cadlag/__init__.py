"""Càdlàg step/piecewise-linear functions and Skorohod-style metrics."""

from .stepfun import (
    DegenerateInterval,
    Polyline,
    StepFunction,
    completed_graph,
    integrate,
    uniform_dist,
)
from .m1 import canonical_param, m1_dist_interval, m1_dist_whole, m1_upper_same_grid
from .j1 import TooManyJumps, j1_dist_interval
from .band import BandSpec, band_entry

__all__ = [
    "StepFunction",
    "Polyline",
    "DegenerateInterval",
    "completed_graph",
    "uniform_dist",
    "integrate",
    "m1_dist_interval",
    "m1_dist_whole",
    "m1_upper_same_grid",
    "canonical_param",
    "j1_dist_interval",
    "TooManyJumps",
    "BandSpec",
    "band_entry",
]
