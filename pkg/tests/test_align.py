import functools
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapalign import scoring as sc
from gapalign.align import (
    align_full,
    align_kgap,
    kgap_bruteforce,
    kgap_scores,
    score_gap_set,
    score_pairs,
    score_via_walks,
)
from gapalign.scoring import BasisCoefficients, LetterCounts, ScoringMatrix
from gapalign.walks import build_walks

from conftest import TEST_MATRICES, random_letters


def full_bruteforce(x, y, S):
    """Best score over every monotone set of aligned pairs (exhaustive)."""
    m, n = len(x), len(y)

    @functools.lru_cache(maxsize=None)
    def best(i, j):
        if i == m:
            return sum(S.score(sc.GAP, y[t]) for t in range(j, n))
        if j == n:
            return sum(S.score(x[t], sc.GAP) for t in range(i, m))
        return max(
            S.score(x[i], y[j]) + best(i + 1, j + 1),
            S.score(x[i], sc.GAP) + best(i + 1, j),
            S.score(sc.GAP, y[j]) + best(i, j + 1),
        )

    return best(0, 0)


def all_optimal_gap_sets(x, y, S, k, tol=1e-9):
    scores = {c: score_gap_set(x, y, S, c) for c in itertools.combinations(range(1, len(y) + 1), k)}
    top = max(scores.values())
    return {c for c, v in scores.items() if v >= top - tol}


def random_instance(rng, nmax=10, kmax=3):
    n = int(rng.integers(1, nmax + 1))
    k = int(rng.integers(0, min(kmax, n) + 1))
    return random_letters(rng, n - k), random_letters(rng, n), k


class TestKgap:
    def test_matches_bruteforce(self, rng):
        for S in TEST_MATRICES:
            for _ in range(500):
                x, y, k = random_instance(rng)
                dp = align_kgap(x, y, S, k)
                bf = kgap_bruteforce(x, y, S, k)
                assert dp.score == pytest.approx(bf.score, abs=1e-9)
                assert dp.gaps == bf.gaps

    def test_witness_reproduces_score(self, rng):
        for S in TEST_MATRICES:
            for _ in range(50):
                x, y, k = random_instance(rng, nmax=30, kmax=6)
                res = align_kgap(x, y, S, k)
                assert len(res.gaps) == k
                assert all(a < b for a, b in zip(res.gaps, res.gaps[1:]))
                assert score_gap_set(x, y, S, res.gaps) == pytest.approx(res.score, abs=1e-9)

    def test_batched_scores_match_single(self, rng):
        S = TEST_MATRICES[5]
        n, k = 25, 4
        X = np.stack([random_letters(rng, n - k) for _ in range(7)])
        Y = np.stack([random_letters(rng, n) for _ in range(7)])
        batch = kgap_scores(X, Y, S, k)
        for b in range(7):
            assert batch[b] == align_kgap(X[b], Y[b], S, k).score
            assert kgap_scores(X[b : b + 1], Y[b : b + 1], S, k)[0] == batch[b]

    def test_k_zero_is_direct_pairing(self):
        x = "abba"
        assert align_kgap(x, x, sc.LCS, 0).score == 4.0
        assert align_kgap("abab", "baba", sc.LCS, 0).score == 0.0

    def test_k_equals_n(self):
        res = align_kgap("", "ab", sc.S0, 2)
        assert res.score == 1.0 and res.gaps == (1, 2)

    @pytest.mark.parametrize("x, y, k", [("ab", "abb", 2), ("abc", "abcd", 1), ("ab", "ab", -1)])
    def test_rejects_bad_shapes(self, x, y, k):
        with pytest.raises(ValueError):
            align_kgap(x, y, sc.LCS, k)

    def test_bruteforce_budget(self):
        with pytest.raises(ValueError):
            kgap_bruteforce("a" * 20, "a" * 40, sc.LCS, 20, budget=1000)


class TestFullAlignment:
    def test_matches_exhaustive(self, rng):
        for S in TEST_MATRICES:
            for _ in range(60):
                x = random_letters(rng, int(rng.integers(0, 7)))
                y = random_letters(rng, int(rng.integers(0, 7)))
                assert align_full(x, y, S).score == pytest.approx(full_bruteforce(tuple(x), tuple(y), S), abs=1e-9)

    def test_witness_reproduces_score(self, rng):
        for S in TEST_MATRICES:
            x, y = random_letters(rng, 15), random_letters(rng, 12)
            res = align_full(x, y, S, witness=True)
            assert score_pairs(x, y, S, res.pairs) == pytest.approx(res.score, abs=1e-9)

    def test_lcs_of_identical_strings(self):
        assert align_full("abbab", "abbab", sc.LCS).score == 5.0
        assert align_full("aaaa", "bbbb", sc.LCS).score == 0.0

    def test_lcs_classic(self):
        assert align_full("abab", "baba", sc.LCS).score == 3.0

    def test_s0_scores_half_per_letter(self, rng):
        for _ in range(20):
            x, y = random_letters(rng, 9), random_letters(rng, 9)
            assert align_full(x, y, sc.S0).score == 9.0

    def test_min_a_closed_form(self, rng):
        for _ in range(500):
            n = int(rng.integers(1, 201))
            x, y = random_letters(rng, n), random_letters(rng, n)
            na = min(int(np.sum(x > 0)), int(np.sum(y > 0)))
            assert align_full(x, y, sc.MIN_A).score == na


class TestWalkIdentity:
    def test_worked_example(self, rng):
        n, gaps = 8, (3, 6)
        x = random_letters(rng, n)
        y = random_letters(rng, n)
        ext = random_letters(rng, 2)
        walks = build_walks(x, y, sc.PRODUCT, 2, ext)
        R = walks.positions()
        expected = R[2, 0] - R[0, 0] + R[5, 1] - R[3, 1] + R[8, 2] - R[6, 2]
        assert score_via_walks(walks, gaps) == expected
        # the k-gap alignment uses X_1..X_{n-k}
        assert score_gap_set(x[: n - 2], y, sc.PRODUCT, gaps) == expected

    def test_random_instances(self, rng):
        for _ in range(500):
            n = int(rng.integers(1, 15))
            k = int(rng.integers(0, min(4, n) + 1))
            x, y, ext = random_letters(rng, n), random_letters(rng, n), random_letters(rng, k)
            gaps = tuple(sorted(rng.choice(np.arange(1, n + 1), size=k, replace=False).tolist()))
            walks = build_walks(x, y, sc.PRODUCT, k, ext)
            assert score_via_walks(walks, gaps) == score_gap_set(x[: n - k], y, sc.PRODUCT, gaps)

    def test_rejects_malformed_gap_sets(self, rng):
        walks = build_walks(random_letters(rng, 6), random_letters(rng, 6), sc.PRODUCT, 2, [1, -1])
        for gaps in [(3,), (4, 4), (5, 2), (0, 3), (3, 7)]:
            with pytest.raises(ValueError):
                score_via_walks(walks, gaps)


class TestDecompositionIdentity:
    def test_fixed_gap_sets(self, rng):
        for S in TEST_MATRICES:
            c = sc.decompose(S)
            R = sc.residual_scoring(S)
            for _ in range(40):
                n = int(rng.integers(1, 12))
                k = int(rng.integers(0, min(3, n) + 1))
                x, y = random_letters(rng, n - k), random_letters(rng, n)
                gaps = tuple(sorted(rng.choice(np.arange(1, n + 1), size=k, replace=False).tolist()))
                diff = score_gap_set(x, y, S, gaps) - score_gap_set(x, y, R, gaps)
                assert diff == pytest.approx(sc.normal_part(c, LetterCounts.of(x, y), n, k), abs=1e-9)

    def test_optimal_scores(self, rng):
        for S in TEST_MATRICES:
            c = sc.decompose(S)
            R = sc.residual_scoring(S)
            for _ in range(40):
                x, y, k = random_instance(rng, nmax=12)
                n = len(y)
                diff = align_kgap(x, y, S, k).score - align_kgap(x, y, R, k).score
                assert diff == pytest.approx(sc.normal_part(c, LetterCounts.of(x, y), n, k), abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(0, 2**32 - 1),
        st.floats(-3, 3, allow_nan=False),
        st.floats(-3, 3, allow_nan=False),
    )
    def test_argmax_invariant_under_normal_shift(self, seed, a0, a1):
        rng = np.random.default_rng(seed)
        S = ScoringMatrix(*np.round(rng.uniform(-2, 2, 5), 2))
        shifted = S + sc.reconstruct(BasisCoefficients(a0, a1, 0, 0, 0))
        x, y, k = random_instance(rng, nmax=9)
        assert all_optimal_gap_sets(x, y, S, k, 1e-7) == all_optimal_gap_sets(x, y, shifted, k, 1e-7)


def test_string_letters():
    assert align_full("ab", "ab", sc.LCS).score == 2.0
    with pytest.raises(ValueError):
        align_full("ac", "ab", sc.LCS)
