"""Self-repulsion weight functions.

A weight is a positive, non-decreasing, non-constant function w on the
integers, represented by a finite table on [-M, M] with constant (saturated)
extension beyond.  Saturation keeps monotonicity and, because w(M) > w(-M),
guarantees the ratio w(-j)/w(j) < 1 for large j, hence exponential tails for
every distribution derived from w.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "WeightError",
    "NonPositiveWeight",
    "NonMonotoneWeight",
    "ConstantWeight",
    "WeightFunction",
    "make_weight",
    "exponential_weight",
    "two_level_weight",
    "load_weight",
    "save_weight",
]


class WeightError(ValueError):
    """Invalid weight table."""


class NonPositiveWeight(WeightError):
    pass


class NonMonotoneWeight(WeightError):
    pass


class ConstantWeight(WeightError):
    pass


@dataclass(frozen=True)
class WeightFunction:
    """Weight table on [-window_radius, window_radius], saturated outside.

    ``values[k + window_radius]`` is w(k).  Instances are immutable and safe
    to share across threads.
    """

    window_radius: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        m = self.window_radius
        if m < 1:
            raise WeightError("window_radius must be a positive integer")
        if vals.shape != (2 * m + 1,):
            raise WeightError(f"expected {2 * m + 1} values for window_radius={m}")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            raise NonPositiveWeight("weights must be positive and finite")
        if np.any(np.diff(vals) < 0.0):
            raise NonMonotoneWeight("weights must be non-decreasing")
        if vals[-1] <= vals[0]:
            raise ConstantWeight("weight must be non-constant: w(M) > w(-M) required")

    def __call__(self, k) -> np.ndarray | float:
        """w(k), with saturated extension outside the window (vectorized)."""
        m = self.window_radius
        idx = np.clip(np.asarray(k, dtype=np.int64), -m, m) + m
        out = self.values[idx]
        return float(out) if np.isscalar(k) or np.ndim(k) == 0 else out

    @property
    def M(self) -> int:
        return self.window_radius

    def log_ratio(self, j) -> np.ndarray | float:
        """log(w(-j)/w(j)); < 0 for j >= the first strict increase."""
        return np.log(self(-np.asarray(j))) - np.log(self(np.asarray(j)))


def make_weight(values, M: int) -> WeightFunction:
    """Validate a table of 2M+1 weights w(-M..M) and wrap it."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size != 2 * M + 1:
        raise WeightError(f"need exactly {2 * M + 1} values, got {values.size}")
    return WeightFunction(window_radius=M, values=values)


def exponential_weight(beta: float, M: int = 8) -> WeightFunction:
    """w(k) = exp(beta*k) on [-M, M]; beta > 0."""
    if beta <= 0:
        raise WeightError("beta must be positive")
    ks = np.arange(-M, M + 1)
    return WeightFunction(window_radius=M, values=np.exp(beta * ks))


def two_level_weight(low: float = 1.0, high: float = 2.0, M: int = 2) -> WeightFunction:
    """Bounded step weight: w(k) = low for k < 0, high for k >= 0."""
    if not (0 < low < high):
        raise WeightError("need 0 < low < high")
    ks = np.arange(-M, M + 1)
    return WeightFunction(window_radius=M, values=np.where(ks < 0, low, high))


def load_weight(path: str | Path) -> WeightFunction:
    """Read a weight from a plain-text file of ``k value`` lines."""
    entries: dict[int, float] = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k_str, v_str = line.split()
        entries[int(k_str)] = float(v_str)
    if not entries:
        raise WeightError(f"no weight entries in {path}")
    m = max(abs(k) for k in entries)
    missing = [k for k in range(-m, m + 1) if k not in entries]
    if missing:
        raise WeightError(f"missing weight entries for k={missing}")
    return make_weight([entries[k] for k in range(-m, m + 1)], m)


def save_weight(w: WeightFunction, path: str | Path) -> None:
    lines = [f"{k} {w(k):.17g}" for k in range(-w.M, w.M + 1)]
    Path(path).write_text("\n".join(lines) + "\n")
