"""Aggregate statistics for trial samples."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

__all__ = [
    "fmean",
    "sample_variance",
    "variance_standard_error",
    "adjusted_skewness",
    "ks_distance",
    "ks_critical",
    "binomial_se",
    "loglog_slope",
]


def fmean(x) -> float:
    x = np.asarray(x, dtype=float)
    return math.fsum(x) / len(x) if len(x) else math.nan


def sample_variance(x) -> float:
    """Unbiased variance by the two-pass formula with compensated sums."""
    x = np.asarray(x, dtype=float)
    m = len(x)
    if m < 2:
        return math.nan
    mean = fmean(x)
    return math.fsum((x - mean) ** 2) / (m - 1)


def variance_standard_error(x) -> float:
    """Standard error of the sample variance, from the fourth central moment."""
    x = np.asarray(x, dtype=float)
    m = len(x)
    if m < 4:
        return math.nan
    mean = fmean(x)
    m2 = math.fsum((x - mean) ** 2) / m
    m4 = math.fsum((x - mean) ** 4) / m
    return math.sqrt(max(m4 - (m - 3) / (m - 1) * m2 * m2, 0.0) / m)


def adjusted_skewness(x) -> float:
    """Bias-corrected sample skewness G1; 0 for constant samples."""
    x = np.asarray(x, dtype=float)
    if len(x) < 3 or np.ptp(x) == 0:
        return 0.0
    return float(stats.skew(x, bias=False))


def ks_distance(z) -> float:
    """Kolmogorov distance between the empirical law of ``z`` and N(0, 1)."""
    z = np.asarray(z, dtype=float)
    if len(z) == 0 or not np.all(np.isfinite(z)):
        return math.nan
    return float(stats.kstest(z, "norm").statistic)


def ks_critical(m: int, level: float = 0.01) -> float:
    """Asymptotic Kolmogorov critical value sqrt(-ln(level/2)/2) / sqrt(m)."""
    return math.sqrt(-0.5 * math.log(level / 2.0)) / math.sqrt(m)


def binomial_se(p: float, m: int) -> float:
    return math.sqrt(p * (1.0 - p) / m)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y on log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)
