"""Fluctuation fields of the local-time profile and their limit.

The centered, sqrt(N)-scaled local times form step functions on the (1/N)
lattice; the coupled i.i.d. field gives three companions: the partial-sum
step function, its linear interpolation, and the interpolation truncated to
the triangle's support.  The limit is a two-sided Brownian motion anchored at
the target-site scale, diffused at the invariant-law variance rate, and
killed outside the support interval.

The subtracted triangle varies within lattice cells, so the step rendering of
the local-time field samples it at cell left edges (offset at most 1/(2 sqrt
N), recorded in metadata); an exact piecewise-linear rendering is available
whenever metrics or the band statistic need exactness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cadlag.stepfun import Polyline, StepFunction, integrate, uniform_dist
from .ray_knight import CoupledSample
from .walk import LocalTimeProfile, triangle_limit

__all__ = [
    "FieldError",
    "WindowTooSmall",
    "InconsistentParams",
    "FluctuationParams",
    "y_pm",
    "y_from_zeta",
    "y_prime",
    "y_double_prime",
    "LimitFieldSample",
    "sample_limit_field",
    "limit_field_function",
    "integrate",
    "m1_whole_upper_edge_aware",
]


class FieldError(ValueError):
    pass


class WindowTooSmall(FieldError):
    pass


class InconsistentParams(FieldError):
    pass


@dataclass(frozen=True)
class FluctuationParams:
    N: int
    x: float
    theta: float
    iota: int
    var_rho: float

    def __post_init__(self):
        if self.var_rho <= 0:
            raise FieldError("var_rho must be positive")
        if self.theta <= 0 or self.N < 1:
            raise FieldError("need theta > 0 and N >= 1")

    @property
    def c(self) -> float:
        return abs(self.x) + 2.0 * self.theta

    @property
    def chi(self) -> int:
        from .walk import WalkParams

        return WalkParams(self.N, self.x, self.theta, self.iota).chi

    @property
    def step_offset_bound(self) -> float:
        """Within-cell triangle variation absorbed by the step rendering."""
        return 0.5 / math.sqrt(self.N)


def _tri(p: FluctuationParams, y) -> np.ndarray | float:
    y = np.asarray(y, dtype=float)
    out = np.maximum((abs(p.x) - np.abs(y)) / 2.0 + p.theta, 0.0)
    return float(out) if out.ndim == 0 else out


def y_pm(profile: LocalTimeProfile, sign: int, p: FluctuationParams,
         mode: str = "step") -> StepFunction | Polyline:
    """Centered scaled local-time field (ell^sign(T, floor(Ny)) - N tri(y))/sqrt N.

    mode 'step': triangle sampled at cell left edges (StepFunction on (1/N)Z).
    mode 'exact': piecewise-linear rendering with the triangle's within-cell
    slope and kink subdivisions.
    """
    if profile.meta and profile.meta.get("N") not in (None, p.N):
        raise InconsistentParams(f"profile N={profile.meta.get('N')} vs params N={p.N}")
    N = p.N
    sq = math.sqrt(N)
    lo = min(profile.lo, math.floor(-p.c * N) - 1)
    hi = max(profile.hi, math.ceil(p.c * N) + 1)
    sites = np.arange(lo, hi + 1)
    ell = profile.ell(sign, sites).astype(float)

    if mode == "step":
        vals = (ell - N * _tri(p, sites / N)) / sq
        return StepFunction(sites / N, vals, 0.0)
    if mode != "exact":
        raise FieldError(f"unknown mode {mode!r}")

    kinks = sorted({0.0, -p.c, p.c})
    us: list[float] = []
    rs: list[float] = []
    for i, l in zip(sites, ell):
        y0, y1 = i / N, (i + 1) / N
        knots = [y0] + [k for k in kinks if y0 < k < y1] + [y1]
        for y in knots[:-1]:
            us.append(y)
            rs.append((l - N * _tri(p, y)) / sq)
        us.append(y1)
        rs.append((l - N * _tri(p, y1)) / sq)  # left limit; next cell may jump
    us_arr, rs_arr = np.array(us), np.array(rs)
    keep = np.ones(us_arr.size, dtype=bool)
    keep[1:] = (np.diff(us_arr) != 0) | (np.diff(rs_arr) != 0)
    return Polyline(us_arr[keep], rs_arr[keep])


def _lattice_index(y: float, N: int) -> int:
    """floor(N y) robust to y being a lattice point stored in floating point."""
    z = N * y
    r = round(z)
    return int(r) if abs(z - r) < 1e-9 else math.floor(z)


class _ZetaSums:
    """Prefix sums of the coupled field around the start site."""

    def __init__(self, zeta: np.ndarray, lo_site: int, chi: int, N: int):
        self.lo_site = lo_site
        self.hi_site = lo_site + zeta.size - 1
        self.chi = chi
        self.sq = math.sqrt(N)
        # cum[k] = sum of zeta over sites [lo_site, lo_site + k - 1]
        self.cum = np.concatenate([[0.0], np.cumsum(zeta)])

    def _sum(self, a: int, b: int) -> float:
        """Sum of zeta over sites a..b inclusive (empty when a > b)."""
        if a > b:
            return 0.0
        if a < self.lo_site or b > self.hi_site:
            raise WindowTooSmall(
                f"zeta window [{self.lo_site}, {self.hi_site}] misses sites [{a}, {b}]")
        return float(self.cum[b - self.lo_site + 1] - self.cum[a - self.lo_site])

    def lattice_value(self, k: int) -> float:
        """Partial-sum field at lattice index k (left or right branch)."""
        if k < self.chi:
            return self._sum(k + 1, self.chi - 1) / self.sq
        return self._sum(self.chi, k - 1) / self.sq

    def lattice_values(self, ks: np.ndarray) -> np.ndarray:
        if np.any(ks < self.lo_site - 1) or np.any(ks > self.hi_site + 1):
            raise WindowTooSmall(
                f"zeta window [{self.lo_site}, {self.hi_site}] misses some of {ks.min()}..{ks.max()}")
        chi_cum = self.cum[self.chi - self.lo_site]
        out = np.empty(ks.size)
        left = ks < self.chi
        out[left] = chi_cum - self.cum[ks[left] + 1 - self.lo_site]
        out[~left] = self.cum[ks[~left] - self.lo_site] - chi_cum
        return out / self.sq


def _zeta_sums(source, p: FluctuationParams) -> _ZetaSums:
    if isinstance(source, CoupledSample):
        zeta, lo_site = source.zeta, source.profile.lo
    else:
        zeta, lo_site = source
        zeta = np.asarray(zeta, dtype=float)
    sums = _ZetaSums(zeta, int(lo_site), p.chi, p.N)
    need_lo = math.floor(-p.c * p.N) - 1
    need_hi = math.ceil(p.c * p.N)
    if sums.lo_site > need_lo or sums.hi_site < need_hi:
        raise WindowTooSmall(
            f"zeta window [{sums.lo_site}, {sums.hi_site}] must cover [{need_lo}, {need_hi}]")
    return sums


def y_from_zeta(source, p: FluctuationParams) -> StepFunction:
    """Partial-sum step field: sums of the coupled variables toward chi.

    Three branches: vanishing outside [-c, c), summing from the right of the
    lattice cell to chi-1 on [-c, chi/N), and from chi up to the cell's left
    neighbour on [chi/N, c).  `source` is a CoupledSample or (zeta, lo_site).
    """
    sums = _zeta_sums(source, p)
    N, c = p.N, p.c
    ks = np.arange(math.floor(-c * N), math.ceil(c * N) + 1)
    bps = np.array(sorted({-c, c} | {k / N for k in ks if -c < k / N < c}))
    idx = np.array([_lattice_index(b, N) for b in bps])
    vals = sums.lattice_values(idx)
    vals[bps >= c - 1e-15] = 0.0
    return StepFunction(bps, vals, 0.0)


def y_prime(source, p: FluctuationParams) -> Polyline:
    """Linear interpolation of the partial-sum field between lattice points."""
    sums = _zeta_sums(source, p)
    N, c = p.N, p.c
    ks = np.arange(math.floor(-c * N) - 1, math.ceil(c * N) + 2)
    vals = sums.lattice_values(ks)
    return Polyline(ks / N, vals)


def y_double_prime(source, p: FluctuationParams) -> Polyline:
    """The interpolated field killed outside [-c, c): jumps appear at +-c."""
    yp = y_prime(source, p)
    c = p.c
    us = [float(u) for u in yp.us]
    rs = [float(r) for r in yp.rs]
    inner_u, inner_r = [], []
    for u, r in zip(us, rs):
        if -c < u < c:
            inner_u.append(u)
            inner_r.append(r)
    v_left = float(yp(-c))
    v_right_limit = float(yp(c))  # continuous, so left limit = value
    us_out = [-c - 1.0, -c, -c] + inner_u + [c, c, c + 1.0]
    rs_out = [0.0, 0.0, v_left] + inner_r + [v_right_limit, 0.0, 0.0]
    return Polyline(np.array(us_out), np.array(rs_out))


@dataclass
class LimitFieldSample:
    """Limit-field path on a grid: Brownian values killed outside [-c, c)."""

    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)  # indicator applied
    raw: np.ndarray = field(repr=False)  # Brownian values before the indicator
    params: FluctuationParams | None = None

    def to_csv(self) -> str:
        lines = ["y,value"]
        lines.extend(f"{y:.17g},{v:.17g}" for y, v in zip(self.grid, self.values))
        return "\n".join(lines) + "\n"


def sample_limit_field(p: FluctuationParams, grid, rng: np.random.Generator) -> LimitFieldSample:
    """Two-sided Brownian path anchored at x, variance rate var_rho, killed
    outside [-c, c); built from independent増 increments outward from x."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise FieldError("grid must be a non-empty increasing array")
    raw = np.empty(grid.size)
    split = int(np.searchsorted(grid, p.x, side="left"))
    # right of the anchor
    prev_y, prev_v = p.x, 0.0
    for idx in range(split, grid.size):
        dv = rng.normal(0.0, math.sqrt(p.var_rho * (grid[idx] - prev_y)))
        raw[idx] = prev_v + dv
        prev_y, prev_v = grid[idx], raw[idx]
    # left of the anchor
    prev_y, prev_v = p.x, 0.0
    for idx in range(split - 1, -1, -1):
        dv = rng.normal(0.0, math.sqrt(p.var_rho * (prev_y - grid[idx])))
        raw[idx] = prev_v + dv
        prev_y, prev_v = grid[idx], raw[idx]
    values = np.where((grid >= -p.c) & (grid < p.c), raw, 0.0)
    return LimitFieldSample(grid=grid, values=values, raw=raw, params=p)


def limit_field_function(sample: LimitFieldSample) -> Polyline:
    """Càdlàg function of a limit-field path: linear between grid points
    inside [-c, c), exact jumps at the support boundary."""
    p = sample.params
    if p is None:
        raise FieldError("sample carries no params")
    c = p.c
    g, raw = sample.grid, sample.raw
    inside = (g > -c) & (g < c)
    v_at_minus_c = float(np.interp(-c, g, raw))
    v_at_c = float(np.interp(c, g, raw))
    us = [-c - 1.0, -c, -c] + list(g[inside]) + [c, c, c + 1.0]
    rs = [0.0, 0.0, v_at_minus_c] + list(raw[inside]) + [v_at_c, 0.0, 0.0]
    return Polyline(np.array(us), np.array(rs))


# -- certified whole-line M1 upper bound for a fluctuation pair --------------

def _graph_values(f: StepFunction, lo: float, hi: float, include_hi_left: bool = True) -> np.ndarray:
    """Values and one-sided limits of f over [lo, hi)."""
    vals = [float(f(lo))]
    bp = f.breakpoints
    inner = bp[(bp > lo) & (bp < hi)]
    if inner.size:
        vals.extend(float(v) for v in f(inner))
        vals.extend(float(v) for v in f.left_limit(inner))
    if include_hi_left:
        vals.append(float(f.left_limit(hi)))
    return np.array(vals)


def _monotone(vals: np.ndarray) -> bool:
    return bool(np.all(np.diff(vals) >= 0) or np.all(np.diff(vals) <= 0))


def _edge_phase_bound(f: StepFunction, g: StepFunction, c: float, edge: float,
                      right: bool) -> float:
    """Paired-representation gap for one support edge.

    f's profile-driven field reaches 0 at `edge` (= I+-/N), g's partial-sum
    field jumps to 0 exactly at +-c.  One representation is frozen while the
    other covers the mismatch stretch; the two then retire to the common zero
    point, synchronized by value when the stretch is monotone and
    sequentially otherwise.  Every branch is a valid pairing, so the result
    is always an upper bound.
    """
    cc = c if right else -c
    u_gap = abs(cc - edge)
    lo_y, hi_y = min(edge, cc), max(edge, cc)
    if lo_y == hi_y:
        return max(u_gap, abs(float(f.left_limit(cc)) - float(g.left_limit(cc))),
                   abs(float(f(cc)) - float(g(cc))))
    inside = (edge <= cc) if right else (edge >= cc)  # profile dies inside the support
    if inside:
        # f freezes at its zero-hitting point while g's graph runs to the
        # boundary; then f's ramp and g's boundary jump retire to (+-c, 0)
        v0 = float(f(edge)) if right else float(f.left_limit(edge))
        g_vals = _graph_values(g, lo_y, hi_y)
        w0 = float(g.left_limit(cc)) if right else float(g(cc))
        walk = max(u_gap, float(np.max(np.abs(g_vals - v0))))
        f_ramp = _graph_values(f, lo_y, hi_y)
        if _monotone(f_ramp):
            retire = max(u_gap, abs(v0 - w0))
        else:
            retire = max(u_gap, float(np.max(np.abs(f_ramp - w0))), abs(w0))
        return max(walk, retire)
    # the profile outlives the support: f's tail stretch runs to zero against
    # g's boundary jump
    w0 = float(g.left_limit(cc)) if right else float(g(cc))
    f_vals = _graph_values(f, lo_y, hi_y)
    v_start = float(f(cc)) if right else float(f.left_limit(cc))
    seq = max(u_gap, float(np.max(np.abs(f_vals - w0))), abs(w0))
    if _monotone(f_vals):
        # both value paths shrink monotonically to 0: synchronize by progress
        return min(seq, max(u_gap, abs(v_start - w0)))
    return seq


def m1_whole_upper_edge_aware(f: StepFunction, g: StepFunction, p: FluctuationParams,
                              i_minus: int, i_plus: int) -> float:
    """Certified upper bound on the whole-line M1 distance of the field pair.

    Combines the shared-time sup pairing on growing windows (exact, expanding
    cum-max over merged breakpoints) with the explicit edge pairings once the
    window covers both support edges; integrates e^(-a) (bound(a) ^ 1) in
    closed form between breakpoint magnitudes.
    """
    N, c = p.N, p.c
    edge_r, edge_l = i_plus / N, i_minus / N
    a_edges = max(c, abs(edge_r), abs(edge_l)) + 2.0 / N

    # the point 0 covers pieces that straddle small windows without containing
    # any breakpoint; with it, the expanding cum-max at magnitudes <= a
    # dominates the true sup over [-a, a]
    pts = np.unique(np.concatenate([f.breakpoints, g.breakpoints,
                                    [0.0, -c, c, edge_l, edge_r]]))
    gaps_right = np.abs(np.asarray(f(pts)) - np.asarray(g(pts)))
    gaps_left = np.abs(np.asarray(f.left_limit(pts)) - np.asarray(g.left_limit(pts)))
    gaps = np.maximum(gaps_right, gaps_left)
    mags = np.abs(pts)
    order = np.argsort(mags, kind="stable")
    mags_sorted = mags[order]
    cum_sup = np.maximum.accumulate(gaps[order])

    core = uniform_dist(f, g, (max(edge_l, -c) - 1e-12, min(edge_r, c)))
    phase = max(core,
                _edge_phase_bound(f, g, c, edge_r, right=True),
                _edge_phase_bound(f, g, c, edge_l, right=False))

    knots = np.unique(np.concatenate([mags_sorted[mags_sorted > 0], [a_edges]]))
    # sup bound on each (prev, knot]: cum-max over candidates with magnitude
    # <= right end (a conservative cover of the window sup)
    ks = np.maximum(np.searchsorted(mags_sorted, knots * (1 + 1e-15), side="right") - 1, 0)
    sup_at = cum_sup[ks]
    bounds = np.where(knots <= a_edges, sup_at, np.minimum(sup_at, phase))
    exps = np.exp(-np.concatenate([[0.0], knots]))
    total = float(np.sum((exps[:-1] - exps[1:]) * np.minimum(bounds, 1.0)))
    total += exps[-1] * min(1.0, phase, float(cum_sup[-1]))
    return float(total)
