"""Statistical utilities for the Monte Carlo harness."""

from __future__ import annotations

import numpy as np
from scipy import stats as sps

__all__ = ["TooFewSamples", "ks_test", "variance_ci", "chi_square_gof", "sample_autocorr"]


class TooFewSamples(ValueError):
    pass


def ks_test(samples, cdf=None, reference=None) -> tuple[float, float]:
    """Kolmogorov-Smirnov test; one-sample against `cdf` or two-sample
    against `reference`.  Returns (statistic, p_value)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 20:
        raise TooFewSamples(f"need at least 20 samples, got {samples.size}")
    if (cdf is None) == (reference is None):
        raise ValueError("pass exactly one of cdf / reference")
    if cdf is not None:
        res = sps.kstest(samples, cdf)
    else:
        reference = np.asarray(reference, dtype=float)
        if reference.size < 20:
            raise TooFewSamples(f"need at least 20 reference samples, got {reference.size}")
        res = sps.ks_2samp(samples, reference)
    return float(res.statistic), float(res.pvalue)


def variance_ci(samples, level: float = 0.95) -> tuple[float, float]:
    """Chi-square confidence interval for the variance.

    Normal-theory interval; under heavy-tailed data the nominal coverage is
    optimistic (the harness records the excess kurtosis alongside so the
    caveat is auditable).
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < 30:
        raise TooFewSamples(f"need at least 30 samples, got {n}")
    s2 = float(np.var(samples, ddof=1))
    alpha = 1.0 - level
    hi_q = sps.chi2.ppf(1.0 - alpha / 2.0, n - 1)
    lo_q = sps.chi2.ppf(alpha / 2.0, n - 1)
    return (n - 1) * s2 / hi_q, (n - 1) * s2 / lo_q


def chi_square_gof(counts, expected_probs, min_expected: float = 5.0) -> tuple[float, float]:
    """Goodness-of-fit chi-square with tail bins merged to `min_expected`.

    counts are observed per category, expected_probs the model pmf over the
    same categories; returns (statistic, p_value).
    """
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(expected_probs, dtype=float)
    if counts.shape != probs.shape:
        raise ValueError("counts and expected_probs must align")
    total = counts.sum()
    expected = probs / probs.sum() * total

    merged_o, merged_e = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(counts, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            merged_o.append(acc_o)
            merged_e.append(acc_e)
            acc_o = acc_e = 0.0
    if merged_e:
        merged_o[-1] += acc_o
        merged_e[-1] += acc_e
    else:
        merged_o, merged_e = [acc_o], [acc_e]
    if len(merged_e) < 2:
        raise TooFewSamples("fewer than two usable bins after merging")
    o = np.array(merged_o)
    e = np.array(merged_e)
    stat = float(np.sum((o - e) ** 2 / e))
    p = float(sps.chi2.sf(stat, len(e) - 1))
    return stat, p


def sample_autocorr(x, lag: int) -> float:
    """Lag-k sample autocorrelation."""
    x = np.asarray(x, dtype=float)
    if x.size <= lag + 1:
        raise TooFewSamples("series shorter than the requested lag")
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0:
        return 0.0
    return float(np.dot(xc[:-lag], xc[lag:]) / denom)
