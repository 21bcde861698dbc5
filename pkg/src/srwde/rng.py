"""Reproducible random streams.

Every replicate owns a counter-based Philox stream keyed by
(master_seed, replicate_index), so results are bitwise identical under any
parallel schedule, and independent replicates never share state.
"""

from __future__ import annotations

import numpy as np

__all__ = ["replicate_rng", "replicate_rngs"]


def replicate_rng(master_seed: int, replicate: int = 0) -> np.random.Generator:
    """Generator for one replicate, keyed (master_seed, replicate)."""
    key = np.array([master_seed % 2**64, replicate % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def replicate_rngs(master_seed: int, n: int, start: int = 0) -> list[np.random.Generator]:
    return [replicate_rng(master_seed, start + i) for i in range(n)]
