"""Sampling the stopped local-time profile from independent site chains.

The profile at the stopping time obeys an exact site-indexed recursion: going
right from the start site chi, each site adds the value of a fresh down-step
chain evaluated at the current level; going left the same happens with a +1
bookkeeping term at positive sites.  The opposite-direction local time is
determined by the same draws, so one sweep yields the full profile, the
stopping time (sum of all crossings) and the first-zero sites.

The coupling augments the sweep with i.i.d. half-integer variables: at each
site the chain value at the threshold index floor(N^(1/6)) is maximally
coupled with an invariant-law copy, which then evolves with the chain (shared
path on success, independent path on failure).

Levels are large over most of the window, where the chain value at the level
index is invariant-law distributed up to a computed 1e-13 total variation;
those sites are drawn in vectorized blocks.  Near the window edges every site
is handled with exact n-step tables and kernel-power bridges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measures import EtaSampler
from .walk import LocalTimeProfile, StepBudgetExceeded, WalkParams
from .weights import WeightFunction

__all__ = [
    "floor_sixth_root",
    "profile_via_eta",
    "CoupledSample",
    "coupled_profile",
    "l_chain_tau",
    "l_chain_tau_many",
]

_BLOCK = 4096


def floor_sixth_root(N: int) -> int:
    """floor(N**(1/6)) without floating-point edge surprises, at least 1."""
    k = max(1, int(round(N ** (1.0 / 6.0))))
    while k**6 > N:
        k -= 1
    while (k + 1) ** 6 <= N:
        k += 1
    return max(k, 1)


@dataclass
class CoupledSample:
    """Profile plus the coupled i.i.d. field over a common site window."""

    profile: LocalTimeProfile
    zeta: np.ndarray = field(repr=False)  # half-integers, indexed like the profile window
    match_flags: np.ndarray = field(repr=False)  # zeta - 1/2 equalled the chain value used
    n_threshold: int = 1

    def to_csv(self) -> str:
        lines = ["i,ell_minus,ell_plus,zeta,matched"]
        prof = self.profile
        for i, em, ep, z, mf in zip(prof.sites(), prof.ell_minus, prof.ell_plus,
                                    self.zeta, self.match_flags):
            lines.append(f"{i},{em},{ep},{z},{int(mf)}")
        return "\n".join(lines) + "\n"


def _mirrored_params(p: WalkParams) -> WalkParams:
    """The reflected problem (positive target, flipped edge) for x <= 0."""
    return WalkParams(N=p.N, x=-p.target_site / p.N, theta=p.theta, iota=-p.iota)


class _BranchSampler:
    """One directional sweep of the level recursion.

    ``plus_one`` marks how many leading sites carry the +1 bookkeeping term
    (left branch at positive sites).  Collects levels until absorption at 0
    and optionally the coupling data per site.
    """

    def __init__(self, sampler: EtaSampler, rng: np.random.Generator, coupled: bool,
                 n_thr: int, site_cap: int):
        self.s = sampler
        self.rng = rng
        self.coupled = coupled
        self.n_thr = n_thr
        self.site_cap = site_cap
        self.levels: list[np.ndarray] = []
        self.zeta: list[np.ndarray] = []
        self.match: list[np.ndarray] = []
        if coupled:
            sampler.coupling_tables(n_thr)
            self.fast_cut = max(sampler.n_cut, n_thr + sampler.m_pow_max)
            self.thr_cum = sampler._nstep_cum[min(n_thr, sampler.n_cut)]
            self.thr_vec = sampler._nstep[min(n_thr, sampler.n_cut)]
        else:
            self.fast_cut = sampler.n_cut

    def _count(self) -> int:
        return sum(len(a) for a in self.levels)

    def run(self, start: int, plus_one_sites: int) -> np.ndarray:
        """Levels from `start` (inclusive) until the first 0 (inclusive)."""
        v = int(start)
        done_plus = 0
        self.levels.append(np.array([v], dtype=np.int64))
        if self.coupled:
            # the start level is a boundary value, not a site draw; the first
            # site's coupling is emitted together with its increment below
            pass
        while v > 0:
            if self._count() > self.site_cap:
                raise StepBudgetExceeded("level recursion exceeded its site budget")
            bonus_left = max(plus_one_sites - (self._count() - 1), 0)
            if v >= self.fast_cut:
                v = self._fast_block(v, bonus_left)
            else:
                v = self._careful_site(v, 1 if bonus_left > 0 else 0)
        return np.concatenate(self.levels)

    def run_extension(self, n_sites: int) -> None:
        """Coupling draws for absorbed sites (level 0) beyond the sweep."""
        if n_sites <= 0 or not self.coupled:
            return
        s, rng = self.s, self.rng
        j = np.searchsorted(self.thr_cum, rng.random(n_sites), side="right")
        v_thr = s.states[j]
        r = s.couple_with_rho(v_thr, self.n_thr, rng)
        self.zeta.append(r + 0.5)
        self.match.append(r == 0)

    def _fast_block(self, v: int, bonus_left: int) -> int:
        s, rng = self.s, self.rng
        size = _BLOCK if bonus_left == 0 else min(_BLOCK, bonus_left)
        z = s.sample_rho(rng, size)
        inc = z + 1 if bonus_left > 0 else z
        cum = v + np.cumsum(inc)
        below = np.nonzero(cum < self.fast_cut)[0]
        k = int(below[0]) + 1 if below.size else size
        cum = np.maximum(cum[:k], 0)  # rho draw may undershoot the support bound
        self.levels.append(cum)
        if self.coupled:
            j = np.searchsorted(self.thr_cum, rng.random(k), side="right")
            v_thr = s.states[j]
            r = s.couple_with_rho(v_thr, self.n_thr, rng)
            matched = r == v_thr
            zeta = np.where(matched, z[:k], s.sample_rho(rng, k)) + 0.5
            self.zeta.append(zeta)
            self.match.append(zeta - 0.5 == z[:k])
        return int(cum[-1])

    def _careful_site(self, v: int, bonus: int) -> int:
        s, rng = self.s, self.rng
        u_draw = s.sample_nstep(v, rng)
        if self.coupled:
            zeta, _ = self._couple_site(v, u_draw)
            self.zeta.append(np.array([zeta]))
            self.match.append(np.array([zeta - 0.5 == u_draw]))
        new_v = max(v + u_draw + bonus, 0)
        self.levels.append(np.array([new_v], dtype=np.int64))
        return new_v

    def _couple_site(self, level: int, u_draw: int) -> tuple[float, int]:
        """(zeta, chain value at the threshold index) for one careful site."""
        s, rng = self.s, self.rng
        n_thr = self.n_thr
        m = level - n_thr
        if m >= s.m_pow_max:
            j = np.searchsorted(self.thr_cum, rng.random(), side="right")
            v_thr = int(s.states[j])
            r = int(s.couple_with_rho(np.array([v_thr]), n_thr, rng)[0])
            zeta = (u_draw if r == v_thr else int(s.sample_rho(rng))) + 0.5
        elif m >= 0:
            # backward bridge: chain value at the threshold given its value at
            # the level index, then the partner; on mismatch the independent
            # copy is advanced m steps from the partner state
            col = s._powers[m][:, u_draw - s.lo]
            wts = self.thr_vec * col
            total = wts.sum()
            if total <= 0:  # numerically unreachable pair; fall back to prior
                wts, total = self.thr_vec, 1.0
            cum = np.cumsum(wts / total)
            cum[-1] = 1.0
            v_thr = int(s.states[np.searchsorted(cum, rng.random(), side="right")])
            r = int(s.couple_with_rho(np.array([v_thr]), n_thr, rng)[0])
            zeta = (u_draw if r == v_thr else s.sample_power_row(m, r, rng)) + 0.5
        else:
            # level below the threshold: run the chain on to the threshold
            v_thr = s.sample_power_row(-m, u_draw, rng)
            r = int(s.couple_with_rho(np.array([v_thr]), n_thr, rng)[0])
            zeta = r + 0.5
        return zeta, v_thr


def _eta_profile_core(w: WeightFunction, p: WalkParams, rng: np.random.Generator,
                      sampler: EtaSampler, coupled: bool):
    """Both sweeps for a non-mirrored (target from x > 0 convention) problem.

    chi is recomputed under the positive-x convention: the mirrored problem
    may carry x = -0.0, for which WalkParams.chi would dispatch wrongly.
    """
    N, threshold = p.N, p.threshold
    chi = p.target_site + (1 if p.iota == +1 else 0)
    n_thr = floor_sixth_root(N)
    site_cap = int(64 * p.c * N) + 100_000

    right = _BranchSampler(sampler, rng, coupled, n_thr, site_cap)
    right_levels = right.run(threshold - (1 if p.iota == +1 else 0), plus_one_sites=0)
    I_plus = chi + right_levels.size - 1

    # For a target at the origin watched on the down edge the walk ends below
    # the start site, so the crossing balance shifts the left start by one.
    left_start = threshold - (1 if (p.iota == -1 and p.target_site == 0) else 0)
    left = _BranchSampler(sampler, rng, coupled, n_thr, site_cap)
    left_levels = left.run(max(left_start, 0), plus_one_sites=max(chi - 1, 0))
    I_minus = chi - left_levels.size

    win_hi = max(I_plus, math.ceil(p.c * N) + 1)
    win_lo = min(I_minus, math.floor(-p.c * N) - 2)
    # absorbed sites (level 0), including the first-zero sites themselves,
    # still carry coupling draws
    right.run_extension(win_hi - I_plus + 1)
    left.run_extension(I_minus - win_lo + 1)

    sites = np.arange(win_lo, win_hi + 1)
    ell_minus = np.zeros(sites.size, dtype=np.int64)
    ell_plus = np.zeros(sites.size, dtype=np.int64)

    # Right of chi: levels are ell^-, and ell^+(i) = ell^-(i+1).
    idx0 = chi - win_lo
    ell_minus[idx0 : idx0 + right_levels.size] = right_levels
    ell_plus[idx0 : idx0 + right_levels.size - 1] = right_levels[1:]

    # Left of chi: levels (chi-1 downward) are ell^+, and
    # ell^-(i) = ell^+(i-1) - 1_{i>0}.
    lsites = chi - 1 - np.arange(left_levels.size)
    ell_plus[lsites - win_lo] = left_levels
    dest = lsites[:-1]  # ell^- at i = chi-1 .. I_minus+1 via ell^+(i-1)
    ell_minus[dest - win_lo] = left_levels[1:] - (dest > 0)

    T = int(ell_minus.sum() + ell_plus.sum())
    profile = LocalTimeProfile(
        lo=int(win_lo), hi=int(win_hi), ell_minus=ell_minus, ell_plus=ell_plus,
        chi=chi, T=T, I_minus=int(I_minus), I_plus=int(I_plus),
        meta={
            "backend": "eta", "N": N, "x": p.x, "theta": p.theta, "iota": p.iota,
            "mirrored_convention": p.mirrored_convention, "n_threshold": n_thr,
        },
    )
    if not coupled:
        return profile

    zeta = np.empty(sites.size)
    match = np.zeros(sites.size, dtype=bool)
    r_zeta = np.concatenate(right.zeta)
    zeta[idx0 : idx0 + r_zeta.size] = r_zeta
    match[idx0 : idx0 + r_zeta.size] = np.concatenate(right.match)
    l_zeta = np.concatenate(left.zeta)
    l_sites = chi - 1 - np.arange(l_zeta.size)
    zeta[l_sites - win_lo] = l_zeta
    match[l_sites - win_lo] = np.concatenate(left.match)
    return CoupledSample(profile=profile, zeta=zeta, match_flags=match, n_threshold=n_thr)


def _reflect_profile(prof: LocalTimeProfile, p: WalkParams) -> LocalTimeProfile:
    """Map the mirrored solution back: i -> -i swaps the two edge counts."""
    return LocalTimeProfile(
        lo=-prof.hi, hi=-prof.lo,
        ell_minus=prof.ell_plus[::-1].copy(),
        ell_plus=prof.ell_minus[::-1].copy(),
        chi=-prof.chi, T=prof.T,
        I_minus=-prof.I_plus, I_plus=-prof.I_minus,
        meta={**prof.meta, "x": p.x, "iota": p.iota, "mirrored_convention": True},
    )


def profile_via_eta(w: WeightFunction, p: WalkParams, rng: np.random.Generator,
                    sampler: EtaSampler | None = None) -> LocalTimeProfile:
    """Sample a stopped local-time profile from the site-chain recursion."""
    sampler = sampler or EtaSampler(w)
    if p.x > 0:
        return _eta_profile_core(w, p, rng, sampler, coupled=False)
    out = _eta_profile_core(w, _mirrored_params(p), rng, sampler, coupled=False)
    return _reflect_profile(out, p)


def coupled_profile(w: WeightFunction, p: WalkParams, rng: np.random.Generator,
                    sampler: EtaSampler | None = None) -> CoupledSample:
    """Profile plus the maximally coupled i.i.d. half-integer field."""
    sampler = sampler or EtaSampler(w)
    if p.x > 0:
        return _eta_profile_core(w, p, rng, sampler, coupled=True)
    out = _eta_profile_core(w, _mirrored_params(p), rng, sampler, coupled=True)
    return CoupledSample(
        profile=_reflect_profile(out.profile, p),
        zeta=out.zeta[::-1].copy(),
        match_flags=out.match_flags[::-1].copy(),
        n_threshold=out.n_threshold,
    )


def l_chain_tau(w: WeightFunction, k0: int, rng: np.random.Generator, cap: int,
                sampler: EtaSampler | None = None) -> int:
    """Hitting time of 0 for the level chain started at k0, censored at cap.

    Each move adds the value of a fresh down-step chain run for the current
    level; returns the first index at or below 0, or cap if not yet absorbed.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    sampler = sampler or EtaSampler(w)
    level = int(k0)
    tau = 0
    while level > 0 and tau < cap:
        level = max(level + sampler.sample_nstep(level, rng), 0)
        tau += 1
    return tau


def l_chain_tau_many(w: WeightFunction, k0: int, n_samples: int,
                     rng: np.random.Generator, cap: int,
                     sampler: EtaSampler | None = None) -> np.ndarray:
    """Vectorized absorption times for n_samples independent level chains."""
    sampler = sampler or EtaSampler(w)
    s = sampler
    levels = np.full(n_samples, int(k0), dtype=np.int64)
    taus = np.zeros(n_samples, dtype=np.int64)
    alive = levels > 0
    steps = 0
    while np.any(alive) and steps < cap:
        idx = np.nonzero(alive)[0]
        lv = levels[idx]
        inc = np.empty(idx.size, dtype=np.int64)
        big = lv >= s.n_cut
        if np.any(big):
            inc[big] = s.sample_rho(rng, int(big.sum()))
        small = ~big
        if np.any(small):
            cums = s._nstep_cum[lv[small]]
            u = rng.random(int(small.sum()))
            inc[small] = s.states[(cums < u[:, None]).sum(axis=1)]
        levels[idx] = np.maximum(lv + inc, 0)
        taus[idx] += 1
        alive[idx] = levels[idx] > 0
        steps += 1
    taus[alive] = cap
    return taus
