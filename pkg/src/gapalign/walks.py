"""Shifted-score random walks and the Gaussian coupling used to compare them with Brownian motion.

Walk ``i`` (``i = 1..k+1``) has steps ``S(X_{j-i+1}, Y_j)``.  Walk 1 pairs
``X_j`` with ``Y_j``; walk ``i`` lags ``X`` by ``i - 1`` positions, so it also
reads the extension letters ``X_0, X_{-1}, .., X_{1-k}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.special import erfc

from .scoring import ProductScoring


@dataclass(frozen=True, eq=False)
class WalkEnsemble:
    k: int
    n: int
    increments: np.ndarray  # n x (k+1); row j-1 holds step j of every walk
    x: np.ndarray  # X_1 .. X_n
    x_ext: np.ndarray  # X_0, X_{-1}, .., X_{1-k}

    def positions(self) -> np.ndarray:
        """R as an (n+1) x (k+1) array with R[0] = 0."""
        R = np.zeros((self.n + 1, self.k + 1))
        np.cumsum(self.increments, axis=0, out=R[1:])
        return R

    def letter(self, t: int) -> float:
        """X_t for 1-k <= t <= n."""
        if 1 <= t <= self.n:
            return float(self.x[t - 1])
        if 1 - self.k <= t <= 0:
            return float(self.x_ext[-t])
        raise IndexError(f"X_{t} is outside 1-k..n = {1 - self.k}..{self.n}")

    def windows(self, start: int, length: int) -> np.ndarray:
        """Rows (X_m, X_{m-1}, .., X_{m-k}) for m = start+1 .. start+length."""
        full = _full_x(self.x, self.x_ext)
        m = np.arange(start + 1, start + length + 1)[:, None]
        return full[m - np.arange(self.k + 1)[None, :] + self.k - 1]


@dataclass(frozen=True)
class CovParams:
    var_diag: float  # VAR[S(X1, Y1)]
    cov_off: float  # COV(S(X1, Y1), S(X0, Y1)): shared Y letter
    cov_v: float  # COV(S(X1, Y1), S(X1, Y2)): shared X letter


def _full_x(x, x_ext) -> np.ndarray:
    # index t + k - 1 holds X_t
    return np.concatenate((np.asarray(x_ext, dtype=float)[::-1], np.asarray(x, dtype=float)))


def build_walks(x, y, scoring, k: int, x_ext=None) -> WalkEnsemble:
    """Build the k+1 walks from ``x`` = X_1..X_n, ``y`` = Y_1..Y_n and the k extension letters."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if len(x) < n:
        raise ValueError(f"walks need X_1..X_{n}, got {len(x)} letters")
    x_ext = np.zeros(0) if x_ext is None else np.asarray(x_ext, dtype=float)
    if len(x_ext) < k:
        raise ValueError(f"walks need the {k} extension letters X_0..X_{1 - k}, got {len(x_ext)}")
    x, x_ext = x[:n], x_ext[:k]
    full = _full_x(x, x_ext)
    j = np.arange(1, n + 1)[:, None]
    i = np.arange(1, k + 2)[None, :]
    xs = full[j - i + 1 + k - 1]
    inc = scoring.pair(xs, np.broadcast_to(y[:, None], xs.shape))
    return WalkEnsemble(k=k, n=n, increments=np.asarray(inc, dtype=float), x=x, x_ext=x_ext)


def theoretical_cov(scoring, p_a: float = 0.5, letter_model: str = "binary") -> CovParams:
    """Exact step moments by enumeration over the letters involved.

    In the ``"normal_y"`` model X is +-1 with P(+1) = p_a, Y is standard normal
    and ``scoring`` must be the product rule; Gaussian moments E[Y] = 0 and
    E[Y^2] = 1 replace the enumeration over Y.
    """
    px = {1.0: p_a, -1.0: 1.0 - p_a}
    if letter_model == "normal_y":
        if not isinstance(scoring, ProductScoring):
            raise ValueError("normal Y letters need the product scoring")
        ex = sum(v * p for v, p in px.items())
        ex2 = sum(v * v * p for v, p in px.items())
        mean = 0.0
        var_diag = ex2 * 1.0 - mean**2
        cov_off = ex * ex * 1.0 - mean**2  # E[X1 X0 Y1^2]
        cov_v = ex2 * 0.0 - mean**2  # E[X1^2] E[Y1] E[Y2]
        return CovParams(var_diag, cov_off, cov_v)
    if letter_model != "binary":
        raise ValueError(f"unknown letter model {letter_model!r}")

    def s(a, b):
        return float(scoring.pair(a, b))

    mean = sum(pa * pb * s(a, b) for (a, pa), (b, pb) in product(px.items(), repeat=2))
    var_diag = sum(pa * pb * s(a, b) ** 2 for (a, pa), (b, pb) in product(px.items(), repeat=2)) - mean**2
    cov_off = -(mean**2)
    cov_v = -(mean**2)
    for (x1, p1), (x0, p0), (y1, q1) in product(px.items(), repeat=3):
        w = p1 * p0 * q1
        cov_off += w * s(x1, y1) * s(x0, y1)
        # same enumeration with the roles of X and Y swapped: (X1, Y1, Y2)
        cov_v += w * s(x1, x0) * s(x1, y1)
    return CovParams(var_diag, cov_off, cov_v)


def empirical_increment_cov(walks: WalkEnsemble, block_start: int, block_len: int) -> np.ndarray:
    """Covariance of the block increment R(start + len) - R(start) given X (normal Y, product rule).

    Equals the sum over the block of the outer products of the letter windows
    (X_m, X_{m-1}, .., X_{m-k}).
    """
    if block_len < 1 or block_start < 0 or block_start + block_len > walks.n:
        raise ValueError(f"block [{block_start + 1}, {block_start + block_len}] is outside [1, {walks.n}]")
    w = walks.windows(block_start, block_len)
    return w.T @ w


def couple_to_isotropic(v, sigma, j: float):
    """Map samples of N(0, sigma) to samples of N(0, j I) by ``N = sqrt(j) sigma^{-1/2} v``.

    ``v`` holds one sample per row.  Returns ``(N, deviation_bound)`` where
    ``deviation_bound = max_i (sqrt(lambda_i) - sqrt(j))^2`` is the operator
    norm of Cov(v - N); it never exceeds ``max_i |lambda_i - j|``.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("sigma must be a square matrix")
    if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(sigma).max())):
        raise ValueError("sigma must be symmetric")
    lam, U = np.linalg.eigh(sigma)
    if lam.min() < -1e-9 * max(1.0, j):
        raise ValueError(f"sigma is not positive semidefinite (smallest eigenvalue {lam.min():.3g})")
    # a singular sigma (e.g. a short block of constant letter products) is clamped;
    # the bound stays below ||sigma - jI|| since that norm is then at least j
    lam = np.maximum(lam, 1e-12 * j)
    A = (U * (math.sqrt(j) / np.sqrt(lam))) @ U.T
    N = np.asarray(v, dtype=float) @ A.T
    bound = float(np.max((np.sqrt(lam) - math.sqrt(j)) ** 2))
    return N, bound


def gaussian_tail(s: float) -> float:
    """P(N(0,1) >= s) for s > 0; never above exp(-s^2/2)/2."""
    if not s > 0:
        raise ValueError("s must be positive")
    return float(0.5 * erfc(s / math.sqrt(2.0)))


def cov_deviation_ratio(sigma, j: int, k: int) -> float:
    """||sigma - j I|| / (k sqrt(j)), the quantity bounded by the covariance event constant."""
    d = np.linalg.eigvalsh(np.asarray(sigma) - j * np.eye(len(sigma)))
    dev = float(np.abs(d).max())
    if k == 0:
        return 0.0 if dev == 0.0 else math.inf
    return dev / (k * math.sqrt(j))


def calibrate_event_constant(k: int, j: int, blocks: int, draws: int, rng, q: float = 0.999) -> float:
    """Monte Carlo quantile of the per-instance covariance deviation ratio.

    Each draw samples fresh symmetric +-1 letters for ``blocks`` consecutive
    blocks of length ``j`` and records the largest ratio over the blocks.
    """
    if k < 1:
        return 0.0
    w_idx = np.arange(j)[:, None] - np.arange(k + 1)[None, :] + k
    offsets = (np.arange(blocks) * j)[:, None, None]
    eye = j * np.eye(k + 1)
    stats = np.empty(draws)
    for d in range(draws):
        x = np.where(rng.random(blocks * j + k) < 0.5, 1.0, -1.0)
        w = x[offsets + w_idx]  # blocks x j x (k+1)
        dev = np.linalg.eigvalsh(np.einsum("bji,bjl->bil", w, w) - eye)
        stats[d] = np.abs(dev).max() / (k * math.sqrt(j))
    return float(np.quantile(stats, q))
