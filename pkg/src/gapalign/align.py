"""Optimal alignment scores.

Two problems are solved here:

* ``align_full``: the classical global alignment where gaps may be placed in
  either string (no gap/gap pairs), scored by a :class:`ScoringMatrix`.
* ``align_kgap``: exactly ``k`` letters of ``Y`` (length ``n``) are aligned with
  gaps and every letter of ``X`` (length ``n - k``) is aligned with a letter of
  ``Y``.  Position ``j`` of ``Y`` that is not gapped is aligned with
  ``X[j - g(j)]`` where ``g(j)`` counts gaps at positions ``<= j``.

Positions in gap sets are 1-based, matching the usual mathematical notation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .scoring import GAP

NEG_INF = -np.inf


@dataclass(frozen=True)
class ScoreResult:
    score: float
    gaps: tuple[int, ...] | None = None
    pairs: tuple[tuple[int, int], ...] | None = None


def _as_letters(s) -> np.ndarray:
    if isinstance(s, str):
        from .scoring import LETTER_CODES

        try:
            return np.array([LETTER_CODES[ch] for ch in s], dtype=float)
        except KeyError as exc:
            raise ValueError(f"unknown letter {exc.args[0]!r}; use 'a' or 'b'") from None
    return np.asarray(s, dtype=float)


# -- unconstrained alignment -------------------------------------------------


def align_full(X, Y, S, witness: bool = False) -> ScoreResult:
    """Best global alignment score of ``X`` and ``Y`` under ``S``.

    Row ``i`` of the lattice is filled in one vectorized pass: the horizontal
    moves form a running maximum after subtracting the prefix sums of the gap
    scores of ``Y``.
    """
    x = _as_letters(X)
    y = _as_letters(Y)
    m, n = len(x), len(y)
    gy = S.gap(y) if n else np.zeros(0)
    gx = S.gap(x) if m else np.zeros(0)
    Gy = np.concatenate(([0.0], np.cumsum(gy)))

    rows = np.empty((m + 1, n + 1)) if witness else None
    prev = Gy.copy()
    if witness:
        rows[0] = prev
    for i in range(1, m + 1):
        cand = np.empty(n + 1)
        cand[0] = prev[0] + gx[i - 1]
        if n:
            cand[1:] = np.maximum(prev[:-1] + S.pair(x[i - 1], y), prev[1:] + gx[i - 1])
        prev = Gy + np.maximum.accumulate(cand - Gy)
        if witness:
            rows[i] = prev
    score = float(prev[n])
    if not witness:
        return ScoreResult(score)
    return ScoreResult(score, pairs=_traceback_full(rows, x, y, S))


def _traceback_full(M, x, y, S) -> tuple[tuple[int, int], ...]:
    i, j = len(x), len(y)
    pairs = []
    tol = 1e-9
    while i > 0 or j > 0:
        here = M[i, j]
        if i > 0 and j > 0 and abs(M[i - 1, j - 1] + S.score(x[i - 1], y[j - 1]) - here) <= tol:
            pairs.append((i, j))
            i, j = i - 1, j - 1
        elif i > 0 and abs(M[i - 1, j] + S.score(x[i - 1], GAP) - here) <= tol:
            i -= 1
        else:
            j -= 1
    return tuple(reversed(pairs))


def score_pairs(X, Y, S, pairs) -> float:
    """Score of the alignment given by 1-based aligned index pairs."""
    x = _as_letters(X)
    y = _as_letters(Y)
    used_x = {p[0] for p in pairs}
    used_y = {p[1] for p in pairs}
    total = sum(S.score(x[i - 1], y[j - 1]) for i, j in pairs)
    total += sum(S.score(x[i], GAP) for i in range(len(x)) if i + 1 not in used_x)
    total += sum(S.score(GAP, y[j]) for j in range(len(y)) if j + 1 not in used_y)
    return float(total)


# -- exactly k gaps in X -----------------------------------------------------


def _check_kgap(x, y, k):
    n = len(y)
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= |Y|, got k={k}, |Y|={n}")
    if len(x) != n - k:
        raise ValueError(f"|X| must equal |Y| - k = {n - k}, got {len(x)}")


def score_gap_set(X, Y, S, gaps) -> float:
    """Score of the k-gap alignment that aligns ``Y[c]`` with a gap for ``c`` in ``gaps``."""
    x = _as_letters(X)
    y = _as_letters(Y)
    gaps = tuple(gaps)
    _check_kgap(x, y, len(gaps))
    gapset = set(gaps)
    total = 0.0
    g = 0
    for j in range(1, len(y) + 1):
        if j in gapset:
            g += 1
            total += float(S.gap(y[j - 1]))
        else:
            total += float(S.pair(x[j - g - 1], y[j - 1]))
    return total


def align_kgap(X, Y, S, k: int, witness: bool = True) -> ScoreResult:
    """Optimal score with exactly ``k`` letters of ``Y`` aligned with gaps.

    With ``witness=True`` the lexicographically smallest optimal gap set is
    returned as well; this keeps an (n+1) x (k+1) table.  Without a witness the
    score is computed with a rolling O(k) column.
    """
    x = _as_letters(X)
    y = _as_letters(Y)
    _check_kgap(x, y, k)
    if not witness:
        return ScoreResult(float(kgap_scores(x[None, :], y[None, :], S, k)[0]))

    n = len(y)
    # B[j, g]: best score of positions j+1..n when g gaps were used in 1..j
    B = np.full((n + 1, k + 1), NEG_INF)
    B[n, k] = 0.0
    gy = S.gap(y)
    for j in range(n, 0, -1):
        for g in range(k + 1):
            best = NEG_INF
            xi = j - g  # X index (1-based) if Y_j is aligned
            if 1 <= xi <= n - k and B[j, g] > NEG_INF:
                best = float(S.pair(x[xi - 1], y[j - 1])) + B[j, g]
            if g < k and B[j, g + 1] > NEG_INF:
                best = max(best, float(gy[j - 1]) + B[j, g + 1])
            B[j - 1, g] = best

    gaps = []
    g = 0
    for j in range(1, n + 1):
        if g < k and B[j, g + 1] > NEG_INF:
            via_gap = float(gy[j - 1]) + B[j, g + 1]
            xi = j - g
            via_pair = NEG_INF
            if 1 <= xi <= n - k and B[j, g] > NEG_INF:
                via_pair = float(S.pair(x[xi - 1], y[j - 1])) + B[j, g]
            if via_gap >= via_pair:
                gaps.append(j)
                g += 1
    return ScoreResult(float(B[0, 0]), gaps=tuple(gaps))


def kgap_scores(X, Y, S, k: int) -> np.ndarray:
    """Batched optimal k-gap scores, one per row of ``X`` (shape B x (n-k)) and ``Y`` (B x n).

    The recurrence runs over positions of ``Y``; each step updates all gap
    counts and all rows at once.  Row results do not depend on the batch they
    were computed in.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    b, n = Y.shape
    if X.shape != (b, n - k) or k < 0 or k > n:
        raise ValueError(f"expected X of shape {(b, n - k)} for k={k}, got {X.shape}")
    m = n - k
    # X padded so that Xp[:, t + k] = X_t (1-based t), zeros outside 1..m
    Xp = np.zeros((b, n + k + 1))
    Xp[:, k + 1 : k + 1 + m] = X
    gaps = np.arange(k + 1)
    M = np.full((b, k + 1), NEG_INF)
    M[:, 0] = 0.0
    G = S.gap(Y)
    for j in range(1, n + 1):
        xi = j - gaps  # 1-based X index for each gap count
        valid = (xi >= 1) & (xi <= m)
        xs = Xp[:, xi + k]
        pair = S.pair(xs, Y[:, j - 1 : j])
        stay = np.where(valid, M + pair, NEG_INF)
        nxt = stay
        if k:
            nxt[:, 1:] = np.maximum(stay[:, 1:], M[:, :-1] + G[:, j - 1 : j])
        M = nxt
    return M[:, k].copy()


def kgap_bruteforce(X, Y, S, k: int, budget: int = 10**6) -> ScoreResult:
    """Exact k-gap optimum by enumerating all C(n, k) gap sets (test oracle).

    Ties resolve to the lexicographically smallest gap set.
    """
    x = _as_letters(X)
    y = _as_letters(Y)
    _check_kgap(x, y, k)
    n = len(y)
    if math.comb(n, k) > budget:
        raise ValueError(f"C({n},{k}) = {math.comb(n, k)} exceeds the enumeration budget {budget}")
    best, best_gaps = NEG_INF, None
    for gaps in itertools.combinations(range(1, n + 1), k):
        s = score_gap_set(x, y, S, gaps)
        if s > best + 1e-12:
            best, best_gaps = s, gaps
    return ScoreResult(best, gaps=best_gaps)


def score_via_walks(walks, gaps) -> float:
    """Gap-set score as a telescoping sum of walk increments (zero gap scores).

    With ``c_0 = 0`` and ``c_{k+1} = n + 1`` the score is
    ``sum_l R^l(c_l - 1) - R^l(c_{l-1})``.
    """
    gaps = tuple(gaps)
    if len(gaps) != walks.k:
        raise ValueError(f"gap set has {len(gaps)} positions, walks were built for k={walks.k}")
    if any(b <= a for a, b in zip(gaps, gaps[1:])) or (gaps and not 1 <= gaps[0] <= gaps[-1] <= walks.n):
        raise ValueError(f"gap positions must be strictly increasing in [1, {walks.n}]")
    R = walks.positions()
    bounds = (0,) + gaps + (walks.n + 1,)
    return float(sum(R[bounds[l + 1] - 1, l] - R[bounds[l], l] for l in range(walks.k + 1)))
