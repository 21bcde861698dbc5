"""The closed band statistic separating jump limits from ramp limits.

A path belongs to the statistic's set when, somewhere in a closed window
around the triangle's right foot, its value or left limit lands in the closed
band [delta1, 2*delta1] in absolute value.  Jumps can hop over the band while
continuous pieces cannot - which is exactly what distinguishes the limit
field (one macroscopic jump) from the prelimit fluctuation paths (many tiny
jumps).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stepfun import CadlagFunction, Polyline, StepFunction

__all__ = ["BandSpec", "band_entry"]


@dataclass(frozen=True)
class BandSpec:
    """Band [delta1, 2*delta1] watched on [center-delta2, center+delta2]."""

    delta1: float
    delta2: float
    center: float
    theta: float | None = None  # when known, enforces delta2 < theta

    def __post_init__(self):
        if self.delta1 <= 0 or self.delta2 <= 0:
            raise ValueError("delta1 and delta2 must be positive")
        if self.theta is not None and not self.delta2 < self.theta:
            raise ValueError("delta2 must be below theta")

    def hits(self, value: float) -> bool:
        return self.delta1 <= abs(value) <= 2 * self.delta1


def _range_hits(band: BandSpec, v0: float, v1: float) -> bool:
    """Does a continuous piece spanning [min,max] of {v0,v1} touch the band?"""
    lo, hi = min(v0, v1), max(v0, v1)
    d1, d2 = band.delta1, 2 * band.delta1
    return (lo <= d2 and hi >= d1) or (lo <= -d1 and hi >= -d2)


def band_entry(f: CadlagFunction, band: BandSpec) -> bool:
    """Exact membership test of the band statistic for f.

    Step functions contribute only their attained values and left limits;
    piecewise-linear pieces contribute their whole value range (intermediate
    value theorem).  The window is closed on both sides.
    """
    w0, w1 = band.center - band.delta2, band.center + band.delta2
    if isinstance(f, StepFunction):
        cands = [float(f(w0)), float(f.left_limit(w0)), float(f(w1)), float(f.left_limit(w1))]
        bp = f.breakpoints
        inner = bp[(bp > w0) & (bp <= w1)]
        cands.extend(float(v) for v in f(inner)) if inner.size else None
        cands.extend(float(v) for v in f.left_limit(inner)) if inner.size else None
        return any(band.hits(v) for v in cands)

    # piecewise linear: walk the knots, treating duplicated knots as jumps
    poly: Polyline = f
    if band.hits(float(poly(w0))) or band.hits(float(poly.left_limit(w0))):
        return True
    if band.hits(float(poly(w1))) or band.hits(float(poly.left_limit(w1))):
        return True
    us, rs = poly.us, poly.rs
    # continuous sub-pieces inside the window, clipped at the window edges
    for k in range(us.size - 1):
        u0, u1 = us[k], us[k + 1]
        if u1 < w0 or u0 > w1 or u0 == u1:
            continue
        c0, c1 = max(u0, w0), min(u1, w1)
        t0 = (c0 - u0) / (u1 - u0)
        t1 = (c1 - u0) / (u1 - u0)
        v0 = (1 - t0) * rs[k] + t0 * rs[k + 1]
        v1 = (1 - t1) * rs[k] + t1 * rs[k + 1]
        if _range_hits(band, v0, v1):
            return True
    # jump knots inside the window: one-sided limits only
    dup = np.nonzero(np.diff(us) == 0)[0]
    for k in dup:
        if w0 <= us[k] <= w1 and (band.hits(float(rs[k])) or band.hits(float(rs[k + 1]))):
            return True
    return False
