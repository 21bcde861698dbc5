"""Càdlàg functions with finitely many breakpoints, and their completed graphs.

Two concrete representations share the metric code path:

* StepFunction - piecewise constant, right-continuous, constant outside its
  breakpoint range.
* Polyline - a list of (u, r) vertices with u non-decreasing.  With strictly
  increasing u it is read as a continuous piecewise-linear function; repeated
  u values encode jumps (as a function: càdlàg) or vertical segments (as a
  parametric curve).  Completed graphs and parametric representations are
  Polylines.

Restriction to [a, b] follows the càdlàg convention: the left limit at a is
redefined to the value at a (a jump exactly at a disappears), while a jump at
b keeps both the left limit and the value.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "DegenerateInterval",
    "StepFunction",
    "Polyline",
    "completed_graph",
    "uniform_dist",
    "integrate",
]


class DegenerateInterval(ValueError):
    pass


def _check_interval(interval) -> tuple[float, float]:
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise DegenerateInterval(f"need a < b, got [{a}, {b}]")
    return a, b


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function; value ``values[k]`` on [b_k, b_{k+1})."""

    breakpoints: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    left_value: float = 0.0

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if bp.size != vals.size:
            raise ValueError("breakpoints and values must have equal length")
        if bp.size and np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "StepFunction":
        return cls(np.array([0.0]), np.array([float(value)]), float(value))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        idx = np.searchsorted(self.breakpoints, y, side="right") - 1
        ext = np.concatenate([[self.left_value], self.values])
        out = ext[idx + 1]
        return float(out) if out.ndim == 0 else out

    def left_limit(self, y):
        y = np.asarray(y, dtype=float)
        idx = np.searchsorted(self.breakpoints, y, side="left") - 1
        ext = np.concatenate([[self.left_value], self.values])
        out = ext[idx + 1]
        return float(out) if out.ndim == 0 else out

    def jump_points(self) -> np.ndarray:
        prev = np.concatenate([[self.left_value], self.values[:-1]])
        return self.breakpoints[self.values != prev]

    def jump_sizes(self) -> np.ndarray:
        prev = np.concatenate([[self.left_value], self.values[:-1]])
        keep = self.values != prev
        return (self.values - prev)[keep]

    def simplified(self) -> "StepFunction":
        """Drop breakpoints where the value does not change."""
        prev = np.concatenate([[self.left_value], self.values[:-1]])
        keep = self.values != prev
        return StepFunction(self.breakpoints[keep], self.values[keep], self.left_value)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("breakpoint,value\n")
        buf.write(f"-inf,{self.left_value:.17g}\n")
        for b, v in zip(self.breakpoints, self.values):
            buf.write(f"{b:.17g},{v:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "StepFunction":
        lines = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("breakpoint")]
        left = 0.0
        bps, vals = [], []
        for ln in lines:
            b_str, v_str = ln.split(",")
            if b_str.strip() in ("-inf", "-Inf", ""):
                left = float(v_str)
            else:
                bps.append(float(b_str))
                vals.append(float(v_str))
        return cls(np.array(bps), np.array(vals), left)

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


@dataclass(frozen=True)
class Polyline:
    """Vertices (u, r) with u non-decreasing.

    Read as a function it is càdlàg piecewise linear: repeated u-knots are
    jumps (left value first), and the function is constant outside the knot
    range.  Read as a parametric curve it is the polygonal path through the
    vertices (vertical segments allowed).
    """

    us: np.ndarray = field(repr=False)
    rs: np.ndarray = field(repr=False)

    def __post_init__(self):
        us = np.asarray(self.us, dtype=float)
        rs = np.asarray(self.rs, dtype=float)
        object.__setattr__(self, "us", us)
        object.__setattr__(self, "rs", rs)
        if us.size != rs.size or us.size == 0:
            raise ValueError("need equally many u and r vertices, at least one")
        if np.any(np.diff(us) < 0):
            raise ValueError("u must be non-decreasing")

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(self.us)

    def __call__(self, y):
        scalar = np.ndim(y) == 0
        y = np.atleast_1d(np.asarray(y, dtype=float))
        n = self.us.size
        # last vertex with u <= y: at a repeated knot this lands past the
        # duplicates, i.e. on the right value
        idx = np.searchsorted(self.us, y, side="right") - 1
        i0 = np.clip(idx, 0, n - 1)
        i1 = np.clip(idx + 1, 0, n - 1)
        du = self.us[i1] - self.us[i0]
        t = np.where(du > 0, (y - self.us[i0]) / np.where(du > 0, du, 1.0), 0.0)
        t = np.clip(t, 0.0, 1.0)
        out = (1 - t) * self.rs[i0] + t * self.rs[i1]
        out = np.where(idx < 0, self.rs[0], out)
        out = np.where(idx >= n - 1, self.rs[-1], out)
        return float(out[0]) if scalar else out

    def left_limit(self, y):
        scalar = np.ndim(y) == 0
        y = np.atleast_1d(np.asarray(y, dtype=float))
        n = self.us.size
        idx = np.searchsorted(self.us, y, side="left")  # first vertex with u >= y
        at_knot = (idx < n) & (self.us[np.clip(idx, 0, n - 1)] == y)
        out = np.asarray(self(y), dtype=float).copy()
        sel = at_knot & (idx > 0)
        out[sel] = self.rs[idx[sel]]  # first vertex at y carries the left value
        out[idx == 0] = self.rs[0]
        return float(out[0]) if scalar else out

    def arc_length(self) -> float:
        return float(np.sum(np.abs(np.diff(self.us)) + np.abs(np.diff(self.rs))))

    def vertices(self) -> np.ndarray:
        return np.stack([self.us, self.rs], axis=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("u,r\n")
        for u, r in zip(self.us, self.rs):
            buf.write(f"{u:.17g},{r:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Polyline":
        lines = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("u,")]
        us, rs = [], []
        for ln in lines:
            u_str, r_str = ln.split(",")
            us.append(float(u_str))
            rs.append(float(r_str))
        return cls(np.array(us), np.array(rs))


CadlagFunction = StepFunction | Polyline


def _inner_breakpoints(f: CadlagFunction, a: float, b: float) -> np.ndarray:
    bp = f.breakpoints
    return bp[(bp > a) & (bp <= b)]


def completed_graph(f: CadlagFunction, interval) -> Polyline:
    """Graph of f on [a, b] with each jump filled by a vertical segment.

    The traversal starts at (a, f(a)) (no jump at the left endpoint by the
    restriction convention), follows the graph, fills each interior jump from
    the left limit to the value, and ends at (b, f(b)) after the jump at b if
    there is one.
    """
    a, b = _check_interval(interval)
    us = [a]
    rs = [float(f(a))]
    for y in _inner_breakpoints(f, a, b):
        lv, v = float(f.left_limit(y)), float(f(y))
        us.append(y)
        rs.append(lv)
        if v != lv:
            us.append(y)
            rs.append(v)
    if us[-1] != b:
        us.append(b)
        rs.append(float(f(b)))
    # collapse exact duplicates created by flat pieces
    us_arr, rs_arr = np.array(us), np.array(rs)
    keep = np.ones(us_arr.size, dtype=bool)
    keep[1:] = (np.diff(us_arr) != 0) | (np.diff(rs_arr) != 0)
    return Polyline(us_arr[keep], rs_arr[keep])


def _eval_candidates(f: CadlagFunction, g: CadlagFunction, a: float, b: float) -> np.ndarray:
    pts = np.unique(np.concatenate([
        np.array([a, b]), _inner_breakpoints(f, a, b), _inner_breakpoints(g, a, b)]))
    return pts


def uniform_dist(f: CadlagFunction, g: CadlagFunction, interval) -> float:
    """Exact sup of |f - g| over [a, b] via merged breakpoints.

    Between merged breakpoints both functions are affine, so the supremum is
    attained at breakpoint values or one-sided limits.
    """
    a, b = _check_interval(interval)
    pts = _eval_candidates(f, g, a, b)
    gap_right = np.abs(np.asarray(f(pts)) - np.asarray(g(pts)))
    inner = pts[pts > a]
    gap_left = np.abs(np.asarray(f.left_limit(inner)) - np.asarray(g.left_limit(inner)))
    return float(max(gap_right.max(), gap_left.max() if inner.size else 0.0))


def integrate(f: CadlagFunction, a: float, b: float) -> float:
    """Exact integral of f over [a, b] (pieces are affine; jumps are null)."""
    a, b = _check_interval((a, b))
    pts = np.unique(np.concatenate([np.array([a, b]), _inner_breakpoints(f, a, b)]))
    right_vals = np.asarray(f(pts[:-1]), dtype=float)
    left_vals = np.asarray(f.left_limit(pts[1:]), dtype=float)
    return float(np.sum(0.5 * (right_vals + left_vals) * np.diff(pts)))
