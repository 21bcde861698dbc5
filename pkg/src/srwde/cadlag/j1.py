"""Certified brackets for the Skorohod J1 distance between step functions.

The J1 distance is an infimum over strictly increasing time changes; exact
computation would need a search over every monotone association of jumps.
This module ships a certified bracket instead:

* upper bound - the best piecewise-linear time change over monotone jump
  matchings, evaluated exactly (all matchings for small jump counts, a beam
  of candidates beyond);
* lower bound - the largest tolerance at which a set of necessary conditions
  (pinned endpoints, jump displacement/size matching, value coverage) fails,
  found by bisection.

Every number returned is a true bound: lower <= d_J1 <= upper.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .stepfun import DegenerateInterval, StepFunction, uniform_dist

__all__ = ["TooManyJumps", "j1_dist_interval"]

_MAX_EXHAUSTIVE = 12


class TooManyJumps(ValueError):
    """Exhaustive matching was requested beyond its size limit."""


def _jumps_in(f: StepFunction, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    pos = f.jump_points()
    size = f.jump_sizes()
    keep = (pos > a) & (pos < b)
    return pos[keep], size[keep]


def _lambda_cost(f: StepFunction, g: StepFunction, a: float, b: float,
                 anchors_y: np.ndarray, anchors_s: np.ndarray) -> float:
    """Exact cost of the piecewise-linear time change through the anchors.

    anchors map y (g's clock) to lambda(y) = s (f's clock); endpoints are
    pinned.  Cost = max(||f o lambda - g||_inf over [a,b], ||lambda - Id||_inf).
    """
    ys = np.concatenate([[a], anchors_y, [b]])
    ss = np.concatenate([[a], anchors_s, [b]])
    time_cost = float(np.max(np.abs(ys - ss))) if ys.size else 0.0

    # f o lambda is a step function with breakpoints at lambda^{-1}(f's bps)
    fb = f.breakpoints
    fb = fb[(fb > a) & (fb <= b)]
    inv = np.interp(fb, ss, ys)
    order = np.argsort(inv, kind="stable")
    inv = inv[order]
    vals = f(fb)[order]
    # collapse breakpoints that collide after the time change
    uniq_inv, idx = np.unique(inv, return_index=True)
    # at a collision the last (rightmost in f's clock) value wins
    last_vals = np.empty(uniq_inv.size)
    bounds = np.append(idx, inv.size)
    for k in range(uniq_inv.size):
        last_vals[k] = vals[bounds[k + 1] - 1]
    h = StepFunction(uniq_inv, last_vals, float(f(a)))
    value_cost = uniform_dist(h, g, (a, b))
    return max(time_cost, value_cost)


def _monotone_matchings(p: int, q: int):
    """All order-preserving partial bijections of {0..p-1} with {0..q-1}."""
    for k in range(0, min(p, q) + 1):
        for fs in combinations(range(p), k):
            for gs in combinations(range(q), k):
                yield list(zip(fs, gs))


def _beam_matchings(fpos, fsize, gpos, gsize, width: int = 8):
    """A few promising monotone matchings for large jump counts.

    Min-max DP over pair costs plus the empty matching; the caller evaluates
    each candidate exactly, so this only affects tightness, not validity.
    """
    p, q = len(fpos), len(gpos)
    pair_cost = np.maximum(np.abs(fpos[:, None] - gpos[None, :]),
                           0.5 * np.abs(fsize[:, None] - gsize[None, :]))
    # DP over (i, j): best max-cost matching of prefixes, match i-j optional
    best = np.full((p + 1, q + 1), 0.0)
    choice = np.zeros((p + 1, q + 1), dtype=np.int8)  # 1: match (i-1, j-1)
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            skip = min(best[i - 1, j], best[i, j - 1])
            take = max(best[i - 1, j - 1], pair_cost[i - 1, j - 1])
            if take <= skip:
                best[i, j], choice[i, j] = take, 1
            else:
                best[i, j], choice[i, j] = skip, 0
    pairs = []
    i, j = p, q
    while i > 0 and j > 0:
        if choice[i, j]:
            pairs.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif best[i - 1, j] <= best[i, j - 1]:
            i -= 1
        else:
            j -= 1
    yield list(reversed(pairs))
    yield []
    if pairs:
        yield list(reversed(pairs))[: max(len(pairs) // 2, 1)]


def _values_on_window(f: StepFunction, lo: float, hi: float) -> np.ndarray:
    """All values f attains on [lo, hi], including the left limit at lo."""
    bp = f.breakpoints
    k0 = int(np.searchsorted(bp, lo, side="left"))
    k1 = int(np.searchsorted(bp, hi, side="right"))
    vals = [float(f.left_limit(lo)), float(f(lo))]
    vals.extend(float(v) for v in f.values[k0:k1])
    return np.array(vals)


def _necessary_ok(f: StepFunction, g: StepFunction, a: float, b: float, d: float) -> bool:
    """Necessary conditions for d_J1 <= d; False certifies d_J1 > d."""
    if abs(float(f(a)) - float(g(a))) > d or abs(float(f(b)) - float(g(b))) > d:
        return False
    fpos, fsize = _jumps_in(f, a, b)
    gpos, gsize = _jumps_in(g, a, b)
    # every big jump must have a size-compatible partner nearby
    for pos, size, opos, osize in ((fpos, fsize, gpos, gsize), (gpos, gsize, fpos, fsize)):
        for s, J in zip(pos, size):
            if abs(J) <= 2 * d:
                continue
            near = np.abs(opos - s) <= d + 1e-12
            if not np.any(np.abs(osize[near] - J) <= 2 * d + 1e-12):
                return False
    # value coverage at probe times: g(y) must be d-close to a value f attains
    # within the d-window around y (and symmetrically)
    probes = np.unique(np.concatenate([[a, b], fpos, gpos,
                                       fpos - 1e-9, gpos - 1e-9]))
    probes = probes[(probes >= a) & (probes <= b)]
    for fn, other in ((f, g), (g, f)):
        for y in probes:
            window_vals = _values_on_window(other, max(y - d, a), min(y + d, b))
            target = float(fn(y))
            if np.min(np.abs(window_vals - target)) > d + 1e-9:
                return False
    return True


def j1_dist_interval(f: StepFunction, g: StepFunction, a: float, b: float,
                     mode: str = "auto") -> tuple[float, float]:
    """Certified (lower, upper) bracket for d_{J1,a,b}(f, g).

    mode: 'exhaustive' enumerates all monotone jump matchings (raises
    TooManyJumps above 12 total jumps), 'beam' uses a candidate search,
    'auto' picks per size.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise DegenerateInterval(f"need a < b, got [{a}, {b}]")
    fpos, fsize = _jumps_in(f, a, b)
    gpos, gsize = _jumps_in(g, a, b)
    p, q = len(fpos), len(gpos)

    if mode not in ("auto", "exhaustive", "beam"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and p + q > _MAX_EXHAUSTIVE:
        raise TooManyJumps(f"{p + q} jumps exceed the exhaustive limit {_MAX_EXHAUSTIVE}")
    exhaustive = mode == "exhaustive" or (mode == "auto" and p + q <= _MAX_EXHAUSTIVE)

    upper = _lambda_cost(f, g, a, b, np.array([]), np.array([]))  # identity time change
    source = _monotone_matchings(p, q) if exhaustive else _beam_matchings(fpos, fsize, gpos, gsize)
    for pairs in source:
        if not pairs:
            continue
        sf = fpos[[i for i, _ in pairs]]
        sg = gpos[[j for _, j in pairs]]
        # lambda maps g's clock to f's clock and must stay strictly increasing
        if np.any(np.diff(np.concatenate([[a], sg, [b]])) <= 0):
            continue
        if np.any(np.diff(np.concatenate([[a], sf, [b]])) <= 0):
            continue
        upper = min(upper, _lambda_cost(f, g, a, b, sg, sf))

    if _necessary_ok(f, g, a, b, 0.0):
        lower = 0.0
    else:
        lo, hi = 0.0, upper
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if _necessary_ok(f, g, a, b, mid):
                hi = mid
            else:
                lo = mid
        lower = lo
    return min(lower, upper), upper
