"""Transition kernels of the embedded chains and their invariant measure.

The signed local-time difference at a fixed site, watched only when it moves,
is a birth-death chain on Z whose up/down probabilities come from the weight
w.  Observing that chain at its down-steps (equivalently, minus it at its
up-steps) gives a second chain; its one-step law from state k puts mass
``prod(p_up(k..k+g-1)) * p_down(k+g)`` on k+g-1.  That chain has a unique
invariant law given by the product formula

    rho_-(i) = (1/R) * prod_{j=1..floor(|2i+1|/2)} w(-j)/w(j),

and rho_0 is its half-integer shift.  Everything here is computed on a
truncated lattice driven by a single tail tolerance, with loud failures when
mass refuses to concentrate.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .weights import WeightFunction

__all__ = [
    "MeasuresError",
    "NonTermination",
    "TruncationOverflow",
    "DiscreteDistribution",
    "xi_step_probs",
    "eta_step",
    "eta_kernel_row",
    "eta_nstep_dist",
    "rho_minus",
    "rho_zero",
    "dist_variance",
    "stationarity_residual",
    "EtaSampler",
]

DEFAULT_TAIL_TOL = 1e-12
DEFAULT_MIX_TOL = 1e-13

_ETA_STEP_CAP = 10**6  # upward excursions before declaring the weight degenerate
_SUPPORT_CAP = 10**6


class MeasuresError(RuntimeError):
    pass


class NonTermination(MeasuresError):
    """Excursion sampler exceeded its iteration cap."""


class TruncationOverflow(MeasuresError):
    """Probability mass failed to concentrate on a bounded window."""


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported pmf on ``offset + Z``.

    Mass ``probs[j]`` sits at ``offset + min_index + j``; the support is a
    contiguous index range and the masses sum to 1 within 1e-12.
    """

    offset: float
    min_index: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if p.ndim != 1 or p.size == 0:
            raise MeasuresError("probs must be a non-empty 1-d array")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise MeasuresError("probabilities must be finite and non-negative")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise MeasuresError(f"probabilities sum to {p.sum():.17g}, not 1")

    @classmethod
    def from_unnormalized(cls, offset: float, min_index: int, weights) -> "DiscreteDistribution":
        w = np.asarray(weights, dtype=float)
        total = float(w.sum())
        if not np.isfinite(total) or total <= 0:
            raise TruncationOverflow("cannot normalize: total mass is not positive")
        return cls(offset=offset, min_index=min_index, probs=w / total)

    @property
    def support(self) -> np.ndarray:
        return self.min_index + np.arange(self.probs.size) + self.offset

    def prob(self, point: float) -> float:
        """Mass at a support point (0.0 off support)."""
        j = int(round(point - self.offset)) - self.min_index
        if 0 <= j < self.probs.size and abs(point - self.offset - round(point - self.offset)) < 1e-9:
            return float(self.probs[j])
        return 0.0

    def mean(self) -> float:
        return float(np.dot(self.probs, self.support))

    def variance(self) -> float:
        mu = self.mean()
        return float(np.dot(self.probs, (self.support - mu) ** 2))

    def tv_distance(self, other: "DiscreteDistribution") -> float:
        """Total variation distance; supports are aligned by their points."""
        if abs(self.offset - other.offset) > 1e-12:
            raise MeasuresError("TV distance needs a common lattice offset")
        lo = min(self.min_index, other.min_index)
        hi = max(self.min_index + self.probs.size, other.min_index + other.probs.size)
        a = np.zeros(hi - lo)
        b = np.zeros(hi - lo)
        a[self.min_index - lo : self.min_index - lo + self.probs.size] = self.probs
        b[other.min_index - lo : other.min_index - lo + other.probs.size] = other.probs
        return 0.5 * float(np.abs(a - b).sum())

    def sample(self, rng: np.random.Generator, size: int | None = None):
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        u = rng.random(size)
        idx = np.searchsorted(cum, u, side="right")
        return self.support[idx]

    def shifted(self, delta: float) -> "DiscreteDistribution":
        return DiscreteDistribution(offset=self.offset + delta, min_index=self.min_index, probs=self.probs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("index,probability\n")
        for point, p in zip(self.support, self.probs):
            buf.write(f"{point:.6g},{p:.17g}\n")
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def xi_step_probs(w: WeightFunction, m: int) -> tuple[float, float]:
    """Up/down probabilities of the signed-difference chain at state m.

    p_up = w(-m) / (w(m) + w(-m)), p_down = w(m) / (w(m) + w(-m)).
    """
    wm = w(m)
    wmm = w(-m)
    total = wm + wmm
    return wmm / total, wm / total


def eta_step(w: WeightFunction, k: int, rng: np.random.Generator, cap: int = _ETA_STEP_CAP) -> int:
    """One transition of the down-step chain from state k, by direct excursion.

    Runs the difference chain upward from k until its first down-step and
    returns the post-step value k + G - 1, G the number of up-moves.
    """
    state = k
    for _ in range(cap):
        p_up, _ = xi_step_probs(w, state)
        if rng.random() < p_up:
            state += 1
        else:
            return state - 1
    raise NonTermination(f"no down-step within {cap} excursions from k={k}")


def eta_kernel_row(w: WeightFunction, k: int, tail_tol: float = DEFAULT_TAIL_TOL) -> DiscreteDistribution:
    """Exact one-step law of the down-step chain from state k.

    P(k+g-1) = prod_{j=0}^{g-1} p_up(k+j) * p_down(k+g), truncated once the
    not-yet-descended mass drops below tail_tol, then renormalized.
    """
    if tail_tol <= 0:
        raise MeasuresError("tail_tol must be positive")
    masses = []
    still_up = 1.0  # probability of at least g consecutive up-moves
    g = 0
    while still_up >= tail_tol:
        p_up, p_down = xi_step_probs(w, k + g)
        masses.append(still_up * p_down)
        still_up *= p_up
        g += 1
        if g > _SUPPORT_CAP:
            raise TruncationOverflow(f"kernel row from k={k} does not concentrate")
    return DiscreteDistribution.from_unnormalized(0.0, k - 1, masses)


def rho_minus(w: WeightFunction, tail_tol: float = DEFAULT_TAIL_TOL) -> DiscreteDistribution:
    """Invariant law of the down-step chain, by the product formula.

    Support {-(r+1), ..., r} grown until the boundary term falls below
    tail_tol; the products are accumulated in log space and mirrored, so the
    reflection symmetry rho(i) = rho(-1-i) is exact by construction.
    """
    if tail_tol <= 0:
        raise MeasuresError("tail_tol must be positive")
    log_cut = np.log(tail_tol)
    log_terms = [0.0]  # log of the unnormalized mass at i = 0, 1, 2, ...
    acc = 0.0
    j = 1
    while True:
        acc += float(w.log_ratio(j))
        if acc <= log_cut:
            break
        log_terms.append(acc)
        j += 1
        if j > _SUPPORT_CAP:
            raise TruncationOverflow("rho_- support did not close; weight ratios fail to decay")
    pos = np.exp(np.array(log_terms))  # i = 0..r
    unnorm = np.concatenate([pos[::-1], pos])  # i = -(r+1)..-1 mirrored onto 0..r
    return DiscreteDistribution.from_unnormalized(0.0, -len(pos), unnorm)


def rho_zero(w: WeightFunction, tail_tol: float = DEFAULT_TAIL_TOL) -> DiscreteDistribution:
    """Half-integer shift of rho_-; symmetric about 0."""
    return rho_minus(w, tail_tol).shifted(0.5)


def dist_variance(d: DiscreteDistribution) -> float:
    return d.variance()


def eta_nstep_dist(w: WeightFunction, n: int, tail_tol: float = DEFAULT_TAIL_TOL) -> DiscreteDistribution:
    """Law of the down-step chain after n steps from state 0."""
    if n < 0:
        raise MeasuresError("n must be non-negative")
    sampler = EtaSampler(w, tail_tol=tail_tol)
    return sampler.nstep_dist(n)


def stationarity_residual(w: WeightFunction, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """L1 residual ||rho K - rho||_1 on the truncated lattice."""
    sampler = EtaSampler(w, tail_tol=tail_tol)
    rho_vec = sampler.rho_vec
    return float(np.abs(rho_vec @ sampler.K - rho_vec).sum())


class EtaSampler:
    """Precomputed kernel machinery for one weight function.

    Holds the dense one-step kernel on a truncated window, the invariant law,
    the n-step laws from 0 up to the mixing cutoff, and (lazily) the small
    kernel powers needed by the coupling.  All tables are immutable after
    construction; samplers take the caller's Generator.
    """

    def __init__(self, w: WeightFunction, tail_tol: float = DEFAULT_TAIL_TOL,
                 mix_tol: float = DEFAULT_MIX_TOL, mix_cap: int = 100_000):
        self.w = w
        self.tail_tol = tail_tol
        self.mix_tol = mix_tol

        self.rho = rho_minus(w, tail_tol)
        r_lo = self.rho.min_index
        r_hi = self.rho.min_index + self.rho.probs.size - 1

        # Window: invariant support plus the upward spread of a boundary row
        # plus slack for downward leakage; rows are folded at the edges.
        spread = eta_kernel_row(w, r_hi, tail_tol)
        up_reach = spread.min_index + spread.probs.size - 1 - r_hi
        margin = max(4, up_reach + 2)
        self.lo = r_lo - margin
        self.hi = r_hi + margin
        self.states = np.arange(self.lo, self.hi + 1)
        d = self.states.size

        K = np.zeros((d, d))
        for s_idx, s in enumerate(self.states):
            row = eta_kernel_row(w, int(s), tail_tol)
            for j, p in zip(row.min_index + np.arange(row.probs.size), row.probs):
                K[s_idx, int(np.clip(j, self.lo, self.hi)) - self.lo] += p
        self.K = K
        self._row_cum = np.cumsum(K, axis=1)
        self._row_cum[:, -1] = 1.0

        self.rho_vec = np.zeros(d)
        self.rho_vec[r_lo - self.lo : r_hi + 1 - self.lo] = self.rho.probs
        self._rho_cum = np.cumsum(self.rho_vec)
        self._rho_cum[-1] = 1.0

        # n-step laws from 0 until TV to the invariant law drops below mix_tol
        # or stalls at the truncation noise floor (recorded either way).
        tables = [np.zeros(d)]
        tables[0][-self.lo] = 1.0
        tv = 0.5 * float(np.abs(tables[0] - self.rho_vec).sum())
        self._tv_trace = [tv]
        n = 0
        while tv >= mix_tol:
            tables.append(tables[-1] @ K)
            prev = tv
            tv = 0.5 * float(np.abs(tables[-1] - self.rho_vec).sum())
            self._tv_trace.append(tv)
            n += 1
            if tv < 1e-9 and tv > 0.95 * prev:
                break
            if n > mix_cap:
                raise TruncationOverflow("n-step laws do not mix; degenerate weight?")
        self.n_cut = n  # laws for n >= n_cut are replaced by rho
        self.mix_achieved = tv
        self._nstep = np.array(tables)
        self._nstep_cum = np.cumsum(self._nstep, axis=1)
        self._nstep_cum[:, -1] = 1.0

        self._powers: np.ndarray | None = None
        self._powers_cum: np.ndarray | None = None
        self._coupling: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    # -- exact laws -------------------------------------------------------

    def nstep_dist(self, n: int) -> DiscreteDistribution:
        """Exact n-step law from 0 (iterates past the cutoff if asked)."""
        if n <= self.n_cut:
            vec = self._nstep[n]
        else:
            vec = self._nstep[self.n_cut]
            for _ in range(n - self.n_cut):
                vec = vec @ self.K
        keep = vec > 0
        idx = np.nonzero(keep)[0]
        lo, hi = idx[0], idx[-1]
        return DiscreteDistribution.from_unnormalized(0.0, int(self.states[lo]), vec[lo : hi + 1])

    def tv_to_rho(self, n: int) -> float:
        if n < len(self._tv_trace):
            return self._tv_trace[n]
        vec = self._nstep[self.n_cut]
        for _ in range(n - self.n_cut):
            vec = vec @ self.K
        return 0.5 * float(np.abs(vec - self.rho_vec).sum())

    # -- kernel powers (for the coupling bridge) ---------------------------

    def _ensure_powers(self, m_max: int) -> None:
        have = 0 if self._powers is None else self._powers.shape[0] - 1
        if have >= m_max:
            return
        d = self.states.size
        mats = [np.eye(d)] if self._powers is None else list(self._powers)
        while len(mats) - 1 < m_max:
            mats.append(mats[-1] @ self.K)
        self._powers = np.array(mats)
        cum = np.cumsum(self._powers, axis=2)
        cum[:, :, -1] = 1.0
        self._powers_cum = cum

    @property
    def m_pow_max(self) -> int:
        """Power horizon: beyond it every in-window start is rho-mixed."""
        self._ensure_mixing_horizon()
        return self._m_pow_max

    def _ensure_mixing_horizon(self) -> None:
        if hasattr(self, "_m_pow_max"):
            return
        # Worst start we actually feed the bridge: support of the threshold
        # law is always inside the invariant support +- a couple of states,
        # but measure the horizon over the full window to stay safe.
        d = self.states.size
        A = np.eye(d)
        m = 0
        prev = np.inf
        while True:
            tv = 0.5 * np.abs(A - self.rho_vec[None, :]).sum(axis=1).max()
            if tv < self.mix_tol or (tv < 1e-9 and tv > 0.95 * prev):
                break
            A = A @ self.K
            m += 1
            prev = tv
            if m > 100_000:
                raise TruncationOverflow("kernel powers do not mix")
        self._m_pow_max = m
        self._pow_mix_achieved = tv
        self._ensure_powers(m)

    # -- sampling ----------------------------------------------------------

    def idx(self, state) -> np.ndarray | int:
        return np.asarray(state) - self.lo

    def sample_rho(self, rng: np.random.Generator, size: int | None = None):
        j = np.searchsorted(self._rho_cum, rng.random(size), side="right")
        return self.states[j]

    def sample_nstep(self, n: int, rng: np.random.Generator):
        """One draw from the n-step law from 0 (rho once past the cutoff)."""
        cum = self._nstep_cum[n] if n < self.n_cut else self._rho_cum
        return int(self.states[np.searchsorted(cum, rng.random(), side="right")])

    def sample_power_row(self, m: int, start: int, rng: np.random.Generator) -> int:
        """One draw from K^m(start, .); start must lie in the window."""
        if m >= self.m_pow_max:
            return int(self.sample_rho(rng))
        cum = self._powers_cum[m, int(start) - self.lo]
        return int(self.states[np.searchsorted(cum, rng.random(), side="right")])

    def step_from(self, state: int, m: int, rng: np.random.Generator) -> int:
        """m explicit one-step transitions from state (kept as a cross-check)."""
        s = int(np.clip(state, self.lo, self.hi))
        for _ in range(m):
            u = rng.random()
            s = int(self.states[np.searchsorted(self._row_cum[s - self.lo], u, side="right")])
        return s

    # -- maximal coupling with the invariant law ---------------------------

    def coupling_tables(self, n_threshold: int) -> tuple[np.ndarray, np.ndarray]:
        """(keep_prob per state, residual cdf) for coupling eta(n_threshold) with rho.

        keep_prob[s] = min(law_n(s), rho(s)) / law_n(s); when the copy is not
        kept, the partner is drawn from the normalized residual of rho.
        The mismatch probability is exactly TV(law_n, rho).
        """
        if n_threshold not in self._coupling:
            law = self._nstep[min(n_threshold, self.n_cut)]
            common = np.minimum(law, self.rho_vec)
            with np.errstate(divide="ignore", invalid="ignore"):
                keep = np.where(law > 0, common / np.maximum(law, 1e-300), 1.0)
            residual = self.rho_vec - common
            mass = residual.sum()
            if mass <= 0:  # laws coincide at tolerance: always keep
                res_cum = self._rho_cum
            else:
                res_cum = np.cumsum(residual / mass)
                res_cum[-1] = 1.0
            self._coupling[n_threshold] = (np.minimum(keep, 1.0), res_cum)
        return self._coupling[n_threshold]

    def couple_with_rho(self, values: np.ndarray, n_threshold: int,
                        rng: np.random.Generator) -> np.ndarray:
        """Draw rho-distributed partners maximally coupled to chain values.

        values are states of the chain at time n_threshold (law: the exact
        n_threshold-step law); the returned array has marginal rho and
        coincides with values whenever the maximal coupling succeeds.
        """
        keep_prob, res_cum = self.coupling_tables(n_threshold)
        values = np.asarray(values)
        u = rng.random(values.shape)
        keep = u < keep_prob[values - self.lo]
        out = values.copy()
        n_res = int((~keep).sum())
        if n_res:
            j = np.searchsorted(res_cum, rng.random(n_res), side="right")
            out[~keep] = self.states[j]
        return out
