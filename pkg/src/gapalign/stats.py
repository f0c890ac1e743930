"""Summary statistics, Kolmogorov-Smirnov distances and power-law fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    variance: float
    stddev: float
    min: float
    max: float


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r2: float
    point_count: int
    slope_stderr: float


def summarize(sample) -> SummaryStats:
    """Welford one-pass mean and unbiased variance, with Kahan-compensated mean updates."""
    values = np.asarray(sample, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("cannot summarize an empty sample")
    mean = 0.0
    comp = 0.0
    m2 = 0.0
    for i, v in enumerate(values.tolist(), 1):
        delta = v - mean
        step = delta / i - comp
        new_mean = mean + step
        comp = (new_mean - mean) - step
        mean = new_mean
        m2 += delta * (v - mean)
    var = m2 / (values.size - 1) if values.size > 1 else 0.0
    var = max(var, 0.0)
    lo, hi = float(values.min()), float(values.max())
    mean = min(max(mean, lo), hi)
    return SummaryStats(values.size, mean, var, math.sqrt(var), lo, hi)


def ks_distance(sample, cdf) -> float:
    """sup |ECDF - cdf| over the sample, using both one-sided gaps."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("KS distance of an empty sample")
    F = np.asarray(cdf(x), dtype=float)
    n = x.size
    # ECDF just after the last copy of each value and just before the first
    upper = np.searchsorted(x, x, side="right") / n
    lower = np.searchsorted(x, x, side="left") / n
    d = max(float(np.max(upper - F)), float(np.max(F - lower)))
    return min(max(d, 0.0), 1.0)


def ks_two_sample(a, b) -> float:
    """sup |ECDF_a - ECDF_b|."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("KS distance of an empty sample")
    grid = np.concatenate((a, b))
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def normal_cdf(mean: float, sd: float):
    from scipy.stats import norm

    return lambda x: norm.cdf(x, loc=mean, scale=sd)


def ks_fitted_normal(sample) -> float:
    """KS distance to the normal law with the sample's mean and standard deviation."""
    s = summarize(sample)
    if s.stddev == 0.0:
        return math.nan
    return ks_distance(sample, normal_cdf(s.mean, s.stddev))


def loglog_fit(n, stddev) -> ExponentFit:
    """Least-squares line through (log n, log stddev)."""
    n = np.asarray(n, dtype=float)
    sd = np.asarray(stddev, dtype=float)
    if n.size != sd.size or n.size < 2:
        raise ValueError("need at least two (n, stddev) points")
    if np.any(n <= 0) or np.any(sd <= 0):
        raise ValueError("log-log fit needs positive n and stddev")
    lx, ly = np.log(n), np.log(sd)
    X = np.column_stack((lx, np.ones_like(lx)))
    (slope, intercept), *_ = np.linalg.lstsq(X, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    if n.size > 2:
        stderr = math.sqrt(ss_res / (n.size - 2) / float(np.sum((lx - lx.mean()) ** 2)))
    else:
        stderr = math.nan
    return ExponentFit(float(slope), float(intercept), r2, int(n.size), stderr)
