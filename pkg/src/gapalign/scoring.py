"""Symmetric scoring functions on the binary alphabet {a, b} plus a gap symbol.

Letters are encoded numerically as ``+1`` (a) and ``-1`` (b).  The gap is the
module-level sentinel :data:`GAP`, never a number, so gaps cannot be scored by
accident through the product rule.

Every symmetric scoring function with ``S(G, G) = 0`` is a linear combination
of five basis matrices ``S0 .. S4``.  The first two give the same score to every
alignment (they are sums of per-letter contributions), so they only add a
letter-count term that can be computed and removed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class _Gap:
    __slots__ = ()

    def __repr__(self) -> str:
        return "GAP"

    def __reduce__(self):
        return "GAP"


GAP = _Gap()

LETTER_CODES = {"a": 1, "b": -1}


@dataclass(frozen=True)
class ScoringMatrix:
    """Upper triangle of a symmetric 3x3 score table over (a, b, G)."""

    saa: float
    sab: float
    sbb: float
    sag: float
    sbg: float

    def score(self, x, y) -> float:
        """Score of a single aligned pair; either side may be :data:`GAP`."""
        if x is GAP and y is GAP:
            return 0.0
        if x is GAP:
            x, y = y, x
        if y is GAP:
            return self.sag if x > 0 else self.sbg
        if x > 0 and y > 0:
            return self.saa
        if x < 0 and y < 0:
            return self.sbb
        return self.sab

    def pair(self, x, y):
        """Vectorized letter/letter scores for +-1 arrays."""
        table = np.array([[self.saa, self.sab], [self.sab, self.sbb]])
        return table[(np.asarray(x) < 0).astype(np.intp), (np.asarray(y) < 0).astype(np.intp)]

    def gap(self, y):
        """Vectorized letter/gap scores for a +-1 array."""
        return np.where(np.asarray(y) > 0, self.sag, self.sbg)

    @property
    def has_gap_scores(self) -> bool:
        return self.sag != 0.0 or self.sbg != 0.0

    def as_array(self) -> np.ndarray:
        """Full 3x3 table in (a, b, G) order."""
        return np.array(
            [
                [self.saa, self.sab, self.sag],
                [self.sab, self.sbb, self.sbg],
                [self.sag, self.sbg, 0.0],
            ]
        )

    @classmethod
    def from_array(cls, m) -> "ScoringMatrix":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            raise ValueError("scoring matrix must be symmetric")
        if m[2, 2] != 0.0:
            raise ValueError("S(G,G) must be 0")
        return cls(m[0, 0], m[0, 1], m[1, 1], m[0, 2], m[1, 2])

    def __add__(self, other: "ScoringMatrix") -> "ScoringMatrix":
        return ScoringMatrix(
            self.saa + other.saa,
            self.sab + other.sab,
            self.sbb + other.sbb,
            self.sag + other.sag,
            self.sbg + other.sbg,
        )

    def __mul__(self, c: float) -> "ScoringMatrix":
        return ScoringMatrix(c * self.saa, c * self.sab, c * self.sbb, c * self.sag, c * self.sbg)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ProductScoring:
    """S(x, y) = x * y on numeric letters (Y may be real valued); gaps score 0."""

    def score(self, x, y) -> float:
        if x is GAP or y is GAP:
            return 0.0
        return float(x) * float(y)

    def pair(self, x, y):
        return np.asarray(x, dtype=float) * np.asarray(y, dtype=float)

    def gap(self, y):
        return np.zeros(np.shape(y))

    has_gap_scores = False


PRODUCT = ProductScoring()


@dataclass(frozen=True)
class BasisCoefficients:
    a0: float
    a1: float
    a2: float
    a3: float
    a4: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.a0, self.a1, self.a2, self.a3, self.a4)


@dataclass(frozen=True)
class LetterCounts:
    naX: int
    nbX: int
    naY: int
    nbY: int

    @classmethod
    def of(cls, x, y) -> "LetterCounts":
        x = np.asarray(x)
        y = np.asarray(y)
        return cls(int((x > 0).sum()), int((x < 0).sum()), int((y > 0).sum()), int((y < 0).sum()))

    @property
    def total_a(self) -> int:
        return self.naX + self.naY


S0 = ScoringMatrix(1.0, 1.0, 1.0, 0.5, 0.5)
S1 = ScoringMatrix(1.0, 0.0, -1.0, 0.5, -0.5)
S2 = ScoringMatrix(1.0, -1.0, 1.0, 0.0, 0.0)
S3 = ScoringMatrix(0.0, 0.0, 0.0, 1.0, -1.0)
S4 = ScoringMatrix(0.0, 0.0, 0.0, 1.0, 1.0)
BASIS = (S0, S1, S2, S3, S4)

# 1 for a match, 0 otherwise; LCS length is the optimal score
LCS = ScoringMatrix(1.0, 0.0, 1.0, 0.0, 0.0)
# optimal score is min(#a in X, #a in Y)
MIN_A = ScoringMatrix(1.0, 0.0, -1.0, 0.0, 0.0)

NAMED = {"S0": S0, "S1": S1, "S2": S2, "S3": S3, "S4": S4, "lcs": LCS, "min_a": MIN_A}


def decompose(S: ScoringMatrix) -> BasisCoefficients:
    a0 = (S.saa + 2.0 * S.sab + S.sbb) / 4.0
    a1 = (S.saa - S.sbb) / 2.0
    a2 = (S.saa - 2.0 * S.sab + S.sbb) / 4.0
    a4 = (S.sag + S.sbg) / 2.0 - a0 / 2.0
    a3 = (S.sag - S.sbg) / 2.0 - a1 / 2.0
    return BasisCoefficients(a0, a1, a2, a3, a4)


def reconstruct(c: BasisCoefficients) -> ScoringMatrix:
    a0, a1, a2, a3, a4 = c.as_tuple()
    return ScoringMatrix(
        saa=a0 + a1 + a2,
        sab=a0 - a2,
        sbb=a0 - a1 + a2,
        sag=a0 / 2.0 + a1 / 2.0 + a3 + a4,
        sbg=a0 / 2.0 - a1 / 2.0 - a3 + a4,
    )


def normal_part(c: BasisCoefficients, counts: LetterCounts, n: int, k: int = 0) -> float:
    """Alignment-independent part of the score contributed by a0*S0 + a1*S1.

    ``n`` is the length of Y and ``n - k`` the length of X.  S0 contributes
    1/2 per letter and S1 contributes +1/2 per ``a`` and -1/2 per ``b``.
    """
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if counts.naX + counts.nbX != n - k or counts.naY + counts.nbY != n:
        raise ValueError(f"letter counts {counts} inconsistent with |X|={n - k}, |Y|={n}")
    letters = counts.naX + counts.nbX + counts.naY + counts.nbY
    h_sum = 0.5 * (counts.naX + counts.naY) - 0.5 * (counts.nbX + counts.nbY)
    return c.a0 * 0.5 * letters + c.a1 * h_sum


def residual_scoring(S: ScoringMatrix) -> ScoringMatrix:
    c = decompose(S)
    return reconstruct(BasisCoefficients(0.0, 0.0, c.a2, c.a3, c.a4))


def mean_pair_score(S, p_a: float = 0.5, letter_model: str = "binary") -> float:
    """E[S(X1, Y1)] for independent letters.

    ``letter_model`` is ``"binary"`` (both strings +-1 with P(a) = p_a) or
    ``"normal_y"`` (X binary, Y standard normal; product scoring only).
    """
    if letter_model == "normal_y":
        if not isinstance(S, ProductScoring):
            raise ValueError("normal Y letters need the product scoring")
        return 0.0
    if isinstance(S, ProductScoring):
        m = 2.0 * p_a - 1.0
        return m * m
    q = 1.0 - p_a
    return p_a * p_a * S.saa + 2.0 * p_a * q * S.sab + q * q * S.sbb


def read_matrix(path) -> ScoringMatrix:
    """Read a scoring matrix from ``saa=``/``sab=``/``sbb=``/``sag=``/``sbg=`` lines."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep or key not in ScoringMatrix.__dataclass_fields__:
            raise ValueError(f"{path}:{lineno}: expected one of saa/sab/sbb/sag/sbg=<real>")
        if key in values:
            raise ValueError(f"{path}:{lineno}: duplicate key {key}")
        values[key] = float(val)
    missing = set(ScoringMatrix.__dataclass_fields__) - set(values)
    if missing:
        raise ValueError(f"{path}: missing keys {sorted(missing)}")
    return ScoringMatrix(**values)


def format_matrix(S: ScoringMatrix) -> str:
    return "".join(f"{k}={_fmt(getattr(S, k))}\n" for k in ("saa", "sab", "sbb", "sag", "sbg"))


def write_matrix(S: ScoringMatrix, path) -> None:
    Path(path).write_text(format_matrix(S))


def _fmt(v: float) -> str:
    return f"{v + 0.0:.15g}"
