"""Discretized multidimensional Brownian motion and the switch-time functional.

``lk_functional`` is the largest total increment collected by following
component 1 up to ``t_1``, component 2 on ``[t_1, t_2]``, ..., component k+1 on
``[t_k, 1]``.  For k+1 independent standard Brownian motions its law is that of
the largest eigenvalue of a (k+1) x (k+1) GUE matrix, so
``k^{1/6} (L - 2 sqrt(k))`` approaches the Tracy-Widom GUE law.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import stats
from .seeding import make_rng

# mean and variance of TW-GUE (standard tabulated values)
TW_MEAN = -1.771087
TW_VAR = 0.813195


@dataclass(frozen=True, eq=False)
class BrownianPaths:
    k: int
    T: int
    values: np.ndarray  # (T+1) x (k+1), values[0] = 0


def default_grid(k: int, factor: int = 64) -> int:
    """Grid steps on [0, 1]: factor * k * ceil(log(k+2)^2), at least ``factor``."""
    return max(factor, factor * k * math.ceil(math.log(k + 2) ** 2))


def sample_bm(k: int, T: int, rng) -> BrownianPaths:
    if k < 0 or T < 1:
        raise ValueError(f"need k >= 0 and T >= 1, got k={k}, T={T}")
    values = np.zeros((T + 1, k + 1))
    steps = rng.standard_normal((T, k + 1)) / math.sqrt(T)
    np.cumsum(steps, axis=0, out=values[1:])
    return BrownianPaths(k, T, values)


def lk_functional(paths) -> float:
    """Max over grid times 0 <= t_1 <= .. <= t_k <= 1 of the collected increments.

    ``D_i(t) = W_i(t) + max_{s <= t} (D_{i-1}(s) - W_i(s))`` with ``D_1 = W_1``;
    the answer is ``D_{k+1}(1)``.
    """
    W = paths.values if isinstance(paths, BrownianPaths) else np.asarray(paths, dtype=float)
    D = W[:, 0] - W[0, 0]
    for i in range(1, W.shape[1]):
        D = W[:, i] + np.maximum.accumulate(D - W[:, i])
    return float(D[-1])


def lk_bruteforce(paths) -> float:
    """Same maximum by enumerating every nondecreasing tuple of grid indices (test oracle)."""
    W = paths.values if isinstance(paths, BrownianPaths) else np.asarray(paths, dtype=float)
    T = W.shape[0] - 1
    k = W.shape[1] - 1
    best = -math.inf
    for ts in itertools.combinations_with_replacement(range(T + 1), k):
        times = (0,) + ts + (T,)
        total = sum(W[times[i + 1], i] - W[times[i], i] for i in range(k + 1))
        best = max(best, total)
    return float(best)


def tw_rescale(value, k: int):
    if k < 1:
        raise ValueError("k must be at least 1")
    return k ** (1.0 / 6.0) * (np.asarray(value) - 2.0 * math.sqrt(k))


def theorem1_statistic(score, n: int, k: int, mean_step: float = 0.0):
    """k^{1/6} (score - n E[S] - 2 sqrt(n k)) / sqrt(n)."""
    if n < 1 or not 1 <= k <= n:
        raise ValueError(f"need n >= 1 and 1 <= k <= n, got n={n}, k={k}")
    return k ** (1.0 / 6.0) * (np.asarray(score) - n * mean_step - 2.0 * math.sqrt(n * k)) / math.sqrt(n)


def delta_n(n: int, k: int, j: int) -> float:
    """Walk-to-Brownian closeness scale 4 max(log n sqrt(j/n), log n sqrt(k) / j^{1/4})."""
    ln = math.log(n)
    return 4.0 * max(ln * math.sqrt(j) / math.sqrt(n), ln * math.sqrt(k) / j**0.25)


# -- Tracy-Widom reference table --------------------------------------------


@dataclass(frozen=True, eq=False)
class TwReference:
    x: np.ndarray
    F: np.ndarray
    mean: float = TW_MEAN
    var: float = TW_VAR

    def __post_init__(self):
        object.__setattr__(self, "_interp", PchipInterpolator(self.x, self.F, extrapolate=False))
        object.__setattr__(self, "_inv", PchipInterpolator(self.F, self.x, extrapolate=False))

    def cdf(self, x):
        """Monotone cubic interpolation; clamped to the end values outside the table."""
        xv = np.clip(np.asarray(x, dtype=float), self.x[0], self.x[-1])
        return self._interp(xv)

    def ppf(self, u):
        uv = np.clip(np.asarray(u, dtype=float), self.F[0], self.F[-1])
        return self._inv(uv)

    def sample(self, size, rng):
        """Inverse-transform draws restricted to the tabulated range."""
        return self.ppf(rng.uniform(self.F[0], self.F[-1], size))


@lru_cache(maxsize=1)
def tw_reference() -> TwReference:
    with resources.files("gapalign.data").joinpath("tw_gue.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    return TwReference(np.array([float(r["x"]) for r in rows]), np.array([float(r["F"]) for r in rows]))


def tw_cdf(x):
    return tw_reference().cdf(x)


def tw_ks(sample) -> float:
    return stats.ks_distance(sample, tw_cdf)


# -- ensembles ---------------------------------------------------------------


def lk_samples(k: int, T: int, seeds) -> np.ndarray:
    """lk_functional for one independent path ensemble per seed."""
    out = np.empty(len(seeds))
    for t, seed in enumerate(seeds):
        out[t] = lk_functional(sample_bm(k, T, make_rng(seed)))
    return out
