import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapalign import brownian as bm
from gapalign.seeding import make_rng


def test_sample_bm_shape_and_origin(rng):
    p = bm.sample_bm(3, 50, rng)
    assert p.values.shape == (51, 4)
    assert np.all(p.values[0] == 0)
    with pytest.raises(ValueError):
        bm.sample_bm(-1, 10, rng)
    with pytest.raises(ValueError):
        bm.sample_bm(1, 0, rng)


def test_sample_bm_is_deterministic():
    a = bm.sample_bm(2, 30, make_rng(5)).values
    b = bm.sample_bm(2, 30, make_rng(5)).values
    assert np.array_equal(a, b)


def test_endpoint_variance_and_independence(rng):
    reps, T = 10_000, 16
    ends = np.array([bm.sample_bm(1, T, rng).values[-1] for _ in range(reps)])
    var = ends.var(axis=0, ddof=1)
    # standard error of a Gaussian sample variance: sqrt(2 / (reps - 1))
    assert np.all(np.abs(var - 1) <= 5 * math.sqrt(2 / (reps - 1)))
    corr = np.corrcoef(ends, rowvar=False)[0, 1]
    assert abs(corr) <= 5 / math.sqrt(reps)


def test_increment_variance(rng):
    T = 200
    steps = np.diff(bm.sample_bm(4, T, rng).values, axis=0).ravel()
    var = steps.var(ddof=1)
    assert abs(var - 1 / T) <= 5 * (1 / T) * math.sqrt(2 / (steps.size - 1))


class TestFunctional:
    def test_k0_is_endpoint(self, rng):
        p = bm.sample_bm(0, 40, rng)
        assert bm.lk_functional(p) == p.values[-1, 0]

    def test_hand_example(self):
        # best: follow W1 up to t=1 (gain 2), then W2 from t=1 to 2 (gain 3)
        W = np.array([[0.0, 0.0], [2.0, -1.0], [1.0, 2.0]])
        assert bm.lk_functional(W) == 5.0
        assert bm.lk_bruteforce(W) == 5.0

    def test_matches_bruteforce_on_injected_paths(self, rng):
        for trial in range(200):
            T = int(rng.integers(1, 13))
            k = int(rng.integers(0, 4))
            # piecewise linear paths with dyadic slopes keep every sum exact
            steps = rng.integers(-8, 9, (T, k + 1)) / 4.0
            W = np.vstack([np.zeros(k + 1), np.cumsum(steps, axis=0)])
            assert bm.lk_functional(W) == bm.lk_bruteforce(W)

    def test_close_to_bruteforce_on_gaussian_paths(self, rng):
        for _ in range(100):
            W = bm.sample_bm(int(rng.integers(0, 4)), int(rng.integers(1, 13)), rng).values
            assert bm.lk_functional(W) == pytest.approx(bm.lk_bruteforce(W), abs=1e-12)

    def test_monotone_in_k_with_duplicated_path(self, rng):
        for _ in range(50):
            W = bm.sample_bm(3, 64, rng).values
            dup = np.column_stack((W, W[:, -1]))
            assert bm.lk_functional(dup) >= bm.lk_functional(W) - 1e-12
            assert bm.lk_functional(W) >= bm.lk_functional(W[:, :-1]) - 1e-12

    def test_grid_refinement(self, rng):
        k, T = 3, 128
        losses = 0
        for _ in range(100):
            fine = bm.sample_bm(k, 2 * T, rng).values
            drop = bm.lk_functional(fine[::2]) - bm.lk_functional(fine)
            if drop > math.log(T) * math.sqrt(1 / T) * (2 * k + 2):
                losses += 1
        assert losses <= 1

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(0.1, 10))
    def test_shift_and_scale(self, seed, shift, scale):
        W = bm.sample_bm(2, 20, np.random.default_rng(seed)).values
        base = bm.lk_functional(W)
        assert bm.lk_functional(W * scale) == pytest.approx(base * scale, abs=1e-9)
        # shifting a whole path does not change its increments
        assert bm.lk_functional(W + shift) == pytest.approx(base, abs=1e-9)


def test_default_grid():
    assert bm.default_grid(0) == 64
    assert bm.default_grid(3) == 64 * 3 * 3
    assert bm.default_grid(25) == 64 * 25 * 11
    assert bm.default_grid(50, factor=8) == 8 * 50 * 16


class TestRescaling:
    def test_tw_rescale_examples(self):
        assert bm.tw_rescale(2 * math.sqrt(7), 7) == pytest.approx(0.0, abs=1e-15)
        assert bm.tw_rescale(3.0, 1) == 1.0
        with pytest.raises(ValueError):
            bm.tw_rescale(1.0, 0)

    def test_theorem1_statistic_centering(self):
        n, k, m = 400, 5, 0.25
        assert bm.theorem1_statistic(n * m + 2 * math.sqrt(n * k), n, k, m) == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(ValueError):
            bm.theorem1_statistic(0.0, 10, 11)

    @given(st.floats(-1e4, 1e4), st.integers(1, 10**6), st.floats(-1, 1))
    def test_theorem1_matches_rescaled_walk(self, score, n, m):
        k = max(1, int(n**0.1))
        direct = bm.theorem1_statistic(score, n, k, m)
        via = bm.tw_rescale((score - n * m) / math.sqrt(n), k)
        assert direct == pytest.approx(via, rel=1e-9, abs=1e-9)

    def test_power_law_display(self):
        # with k = n^alpha exactly the scale is n^{1/2 - alpha/6} and the shift 2 n^{1/2 + alpha/2}
        alpha, n, k = 1 / 12, 2**24, 4
        score = 2 * n ** (0.5 + alpha / 2) + 3 * n ** (0.5 - alpha / 6)
        assert bm.theorem1_statistic(score, n, k) == pytest.approx(3.0, rel=1e-12)


class TestTracyWidomTable:
    def test_table_shape(self):
        ref = bm.tw_reference()
        assert len(ref.x) == 81 and ref.x[0] == -5.0 and ref.x[-1] == 3.0
        assert np.all(np.diff(ref.F) >= 0)
        assert ref.F[0] < 0.001 and ref.F[-1] > 0.999

    def test_interpolation_monotone(self):
        grid = np.linspace(-6, 4, 5001)
        assert np.all(np.diff(bm.tw_cdf(grid)) >= 0)

    def test_moments_from_table(self):
        ref = bm.tw_reference()
        x = np.linspace(-5, 3, 20001)
        pdf = np.gradient(bm.tw_cdf(x), x)
        mean = np.trapezoid(x * pdf, x)
        var = np.trapezoid((x - mean) ** 2 * pdf, x)
        assert mean == pytest.approx(ref.mean, abs=2e-3)
        assert var == pytest.approx(ref.var, abs=5e-3)

    def test_median(self):
        ref = bm.tw_reference()
        med = float(ref.ppf(0.5))
        assert -1.9 < med < -1.7
        assert bm.tw_cdf(med) == pytest.approx(0.5, abs=1e-6)

    def test_self_consistency(self):
        sample = bm.tw_reference().sample(10_000, make_rng(3))
        assert bm.tw_ks(sample) <= 0.02

    def test_far_from_standard_normal(self):
        assert bm.tw_ks(make_rng(4).standard_normal(10_000)) >= 0.25

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            bm.tw_ks([])


def test_lk_samples_reproducible():
    a = bm.lk_samples(2, 50, [1, 2, 3])
    assert np.array_equal(a, bm.lk_samples(2, 50, [1, 2, 3]))
    assert a[0] == bm.lk_samples(2, 50, [1])[0]


def test_delta_n():
    n, k, j = 10_000, 2, 100
    assert bm.delta_n(n, k, j) == pytest.approx(4 * max(math.log(n) * 0.1, math.log(n) * math.sqrt(2) / math.sqrt(10)))
