"""Direct simulation of the walk with directed-edge local times.

The walk starts at 0; from site s it steps to s+1 with probability
w(D)/(w(D)+w(-D)) where D is the (down minus up) directed-edge local-time
difference at s, and runs until the watched directed edge at the target site
has been crossed floor(N*theta) times.  This simulator is the ground-truth
oracle for the chain construction in ray_knight.

Replicates are embarrassingly parallel; the batch runner advances many walks
in lock-step numpy operations while feeding each lane from its own stream,
so a batch is bitwise equivalent to running the lanes one at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .weights import WeightFunction

__all__ = [
    "WalkError",
    "StepBudgetExceeded",
    "WalkParams",
    "LocalTimeProfile",
    "simulate_to_T",
    "simulate_batch",
    "hitting_indices",
    "triangle_limit",
    "sup_triangle_deviation",
]


class WalkError(RuntimeError):
    pass


class StepBudgetExceeded(WalkError):
    """The walk outlived its step cap; bug or pathological parameters."""


@dataclass(frozen=True)
class WalkParams:
    """Scale N, target-site scale x, threshold scale theta, watched edge iota."""

    N: int
    x: float
    theta: float
    iota: int = -1  # +1 / -1: which directed edge count stops the walk

    def __post_init__(self):
        if self.N < 1:
            raise WalkError("N must be a positive integer")
        if self.theta <= 0:
            raise WalkError("theta must be positive")
        if self.iota not in (+1, -1):
            raise WalkError("iota must be +1 or -1")

    @property
    def target_site(self) -> int:
        return math.floor(self.N * self.x)

    @property
    def threshold(self) -> int:
        return math.floor(self.N * self.theta)

    @property
    def c(self) -> float:
        """Support half-width |x| + 2*theta of the limit triangle."""
        return abs(self.x) + 2.0 * self.theta

    @property
    def chi(self) -> int:
        """Start site of the site-indexed recursions.

        floor(Nx) for iota=- and floor(Nx)+1 for iota=+ when x > 0; the
        mirrored convention for x <= 0 (an explicit assumption, flagged in
        profile metadata, not stated by the construction for that case).
        """
        if self.x > 0:
            return self.target_site + (1 if self.iota == +1 else 0)
        return self.target_site - (1 if self.iota == -1 else 0)

    @property
    def mirrored_convention(self) -> bool:
        return self.x <= 0

    def default_step_cap(self) -> int:
        return max(10_000, int(100 * self.N**2 * self.c**2))


@dataclass
class LocalTimeProfile:
    """Directed-edge local times at the stopping time over [lo, hi].

    ell_minus[i-lo] counts crossings of (i, i-1); ell_plus of (i, i+1); both
    vanish outside [I_minus, I_plus] which the window always contains.
    """

    lo: int
    hi: int
    ell_minus: np.ndarray = field(repr=False)
    ell_plus: np.ndarray = field(repr=False)
    chi: int = 0
    T: int = 0
    I_minus: int = 0
    I_plus: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.hi - self.lo + 1
        if self.ell_minus.shape != (n,) or self.ell_plus.shape != (n,):
            raise WalkError("profile arrays must span [lo, hi]")

    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def ell(self, sign: int, i) -> np.ndarray | int:
        """ell^sign at site(s) i, zero outside the window."""
        arr = self.ell_plus if sign == +1 else self.ell_minus
        i = np.asarray(i)
        inside = (i >= self.lo) & (i <= self.hi)
        out = np.zeros(i.shape, dtype=np.int64)
        out[inside] = arr[i[inside] - self.lo]
        return int(out) if out.ndim == 0 else out

    def total_crossings(self) -> int:
        return int(self.ell_minus.sum() + self.ell_plus.sum())

    def to_csv(self) -> str:
        lines = ["i,ell_minus,ell_plus"]
        for i, em, ep in zip(self.sites(), self.ell_minus, self.ell_plus):
            lines.append(f"{i},{em},{ep}")
        return "\n".join(lines) + "\n"


def triangle_limit(x: float, theta: float, y: float) -> float:
    """Deterministic local-time limit ((|x|-|y|)/2 + theta)_+ at y."""
    if theta <= 0:
        raise WalkError("theta must be positive")
    return max((abs(x) - abs(y)) / 2.0 + theta, 0.0)


def hitting_indices(profile: LocalTimeProfile) -> tuple[int, int]:
    """First zero of ell^- at/right of chi and of ell^+ left of chi."""
    chi = profile.chi
    i = chi
    while profile.ell(-1, i) != 0:
        i += 1
        if i > profile.hi + 1:
            raise WalkError("no right zero inside the window")
    i_plus = i
    i = chi - 1
    while profile.ell(+1, i) != 0:
        i -= 1
        if i < profile.lo - 1:
            raise WalkError("no left zero inside the window")
    return i, i_plus


class _LaneUniforms:
    """Per-lane uniform buffers, each fed in order from its own generator.

    Guarantees that lane r consumes exactly the sequence rng_r.random() would
    produce, independent of batching, so batch runs equal scalar runs bit for
    bit.
    """

    def __init__(self, rngs: list[np.random.Generator], chunk: int = 4096):
        self.rngs = rngs
        self.chunk = chunk
        n = len(rngs)
        self.buf = np.empty((n, chunk))
        self.pos = np.full(n, chunk, dtype=np.int64)

    def take(self, lanes: np.ndarray) -> np.ndarray:
        need = lanes[self.pos[lanes] >= self.chunk]
        for lane in need:
            self.buf[lane] = self.rngs[lane].random(self.chunk)
            self.pos[lane] = 0
        out = self.buf[lanes, self.pos[lanes]]
        self.pos[lanes] += 1
        return out


def simulate_batch(w: WeightFunction, p: WalkParams, rngs: list[np.random.Generator],
                   step_cap: int | None = None) -> list[LocalTimeProfile]:
    """Run len(rngs) independent walks to their stopping time."""
    n_lanes = len(rngs)
    if n_lanes == 0:
        return []
    cap = p.default_step_cap() if step_cap is None else step_cap
    target = p.target_site
    threshold = p.threshold

    # Step-probability lookup: the law depends only on D = ell^- - ell^+ at
    # the current site and saturates outside the weight window.
    M = w.M
    dd = np.arange(-(M + 1), M + 2)
    up_table = w(dd) / (w(dd) + w(-dd))

    half = max(int(4 * p.c * p.N), abs(target) + 2, 8)
    lo = -half
    width = 2 * half + 1
    ellm = np.zeros((n_lanes, width), dtype=np.int32)
    ellp = np.zeros((n_lanes, width), dtype=np.int32)
    pos = np.zeros(n_lanes, dtype=np.int64)
    steps = np.zeros(n_lanes, dtype=np.int64)
    active = np.arange(n_lanes)
    uniforms = _LaneUniforms(rngs)

    watched = ellm if p.iota == -1 else ellp

    if threshold == 0:  # the watched count is already at its target
        active = active[:0]

    while active.size:
        idx = pos[active] - lo
        delta = ellm[active, idx] - ellp[active, idx]
        pu = up_table[np.clip(delta, -(M + 1), M + 1) + M + 1]
        up = uniforms.take(active) < pu

        a_up = active[up]
        a_dn = active[~up]
        ellp[a_up, idx[up]] += 1
        ellm[a_dn, idx[~up]] += 1
        pos[a_up] += 1
        pos[a_dn] -= 1
        steps[active] += 1

        done = watched[active, target - lo] >= threshold
        if np.any(done):
            active = active[~done]
        if np.any(steps[active] >= cap):
            raise StepBudgetExceeded(f"walk exceeded {cap} steps (N={p.N}, x={p.x}, theta={p.theta})")
        if np.any(np.abs(pos[active]) >= half - 1):
            ellm = np.pad(ellm, ((0, 0), (half, half)))
            ellp = np.pad(ellp, ((0, 0), (half, half)))
            lo -= half
            half *= 2
            width = 2 * half + 1
            watched = ellm if p.iota == -1 else ellp

    profiles = []
    for lane in range(n_lanes):
        profiles.append(_extract_profile(p, lo, ellm[lane], ellp[lane], int(steps[lane])))
    return profiles


def _extract_profile(p: WalkParams, lo: int, ellm_row: np.ndarray, ellp_row: np.ndarray,
                     T: int) -> LocalTimeProfile:
    nz = np.nonzero(ellm_row + ellp_row)[0]
    if nz.size == 0:  # threshold 0: the walk never moved
        first, last = -lo, -lo
    else:
        first, last = int(nz[0]), int(nz[-1])
    w_lo = min(lo + first - 1, p.chi - 1)
    w_hi = max(lo + last + 1, p.chi + 1)
    sites = np.arange(w_lo, w_hi + 1)
    inside = (sites >= lo) & (sites <= lo + ellm_row.size - 1)
    em = np.zeros(sites.size, dtype=np.int64)
    ep = np.zeros(sites.size, dtype=np.int64)
    em[inside] = ellm_row[sites[inside] - lo]
    ep[inside] = ellp_row[sites[inside] - lo]
    prof = LocalTimeProfile(
        lo=w_lo,
        hi=w_hi,
        ell_minus=em,
        ell_plus=ep,
        chi=p.chi,
        T=T,
        meta={
            "backend": "walk",
            "N": p.N,
            "x": p.x,
            "theta": p.theta,
            "iota": p.iota,
            "mirrored_convention": p.mirrored_convention,
        },
    )
    prof.I_minus, prof.I_plus = hitting_indices(prof)
    return prof


def simulate_to_T(w: WeightFunction, p: WalkParams, rng: np.random.Generator,
                  step_cap: int | None = None) -> LocalTimeProfile:
    """Single walk to its stopping time; see simulate_batch."""
    return simulate_batch(w, p, [rng], step_cap=step_cap)[0]


def sup_triangle_deviation(profile: LocalTimeProfile, p: WalkParams, sign: int = +1) -> float:
    """sup over all real y of |ell^sign(T, floor(Ny))/N - triangle(y)|.

    Exact: on each lattice cell the triangle is monotone between kinks, so the
    supremum is attained at cell edges; cells beyond the profile window where
    the triangle is still positive are included.
    """
    N = p.N
    lo = min(profile.lo, math.floor(-p.c * N) - 1)
    hi = max(profile.hi, math.ceil(p.c * N) + 1)
    sites = np.arange(lo, hi + 1)
    vals = profile.ell(sign, sites) / N

    kinks = sorted({0.0, p.c, -p.c, abs(p.x), -abs(p.x)})
    best = 0.0
    for i, v in zip(sites, vals):
        y0, y1 = i / N, (i + 1) / N
        cands = [y0, y1] + [k for k in kinks if y0 < k < y1]
        for y in cands:
            best = max(best, abs(v - triangle_limit(p.x, p.theta, y)))
    return best
