"""Marginal model: clamped frequencies in, unbiased Bernoulli samples out."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from edalab.umda import MarginalModel, UmdaConfig


def bits(*rows):
    return np.array([[int(c) for c in row] for row in rows], dtype=np.uint8)


class TestFit:
    def test_means(self):
        m = MarginalModel(4)
        m.fit(bits("0000", "1111"))
        assert np.allclose(m.p, 0.5)

    def test_clamp_arithmetic(self):
        m = MarginalModel(4)
        m.fit(bits("1111"))
        assert np.allclose(m.p, 0.75)  # 1 clamped to 1 - 1/4

    def test_rejects_n_below_three(self):
        with pytest.raises(ValueError):
            MarginalModel(2)

    def test_rejects_empty_training_set(self):
        with pytest.raises(ValueError):
            MarginalModel(4).fit(np.empty((0, 4), dtype=np.uint8))

    @given(st.integers(3, 12).flatmap(
        lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                           min_size=1, max_size=30)))
    @settings(max_examples=50)
    def test_clamp_invariant(self, rows):
        data = np.array(rows, dtype=np.uint8)
        m = MarginalModel(data.shape[1])
        m.fit(data)
        lo, hi = m.clamp_bounds
        assert (m.p >= lo).all() and (m.p <= hi).all()


class TestSample:
    def test_empty_count(self):
        m = MarginalModel(5)
        assert m.sample(0, np.random.default_rng(0)).shape == (0, 5)

    def test_deterministic_in_seed(self):
        m = MarginalModel(6)
        m.fit(bits("111000", "101010", "011100"))
        a = m.sample(50, np.random.default_rng(7))
        b = m.sample(50, np.random.default_rng(7))
        assert np.array_equal(a, b)

    def test_clamp_max_everywhere_gives_mostly_ones(self):
        m = MarginalModel(100)
        m.fit(np.ones((10, 100), dtype=np.uint8))
        samples = m.sample(1000, np.random.default_rng(3))
        assert samples.mean() >= 0.95

    def test_chi_square_goodness_of_fit(self):
        # per-bit 1-df components sum to a chi^2 with n degrees of freedom
        rng = np.random.default_rng(2024)
        n, draws = 12, 10_000
        m = MarginalModel(n)
        m.p = np.clip(rng.uniform(0.05, 0.95, n), *m.clamp_bounds)
        samples = m.sample(draws, rng)
        ones = samples.sum(axis=0)
        expected = m.p * draws
        chi2 = (((ones - expected) ** 2) / expected
                + ((draws - ones - (draws - expected)) ** 2) / (draws - expected)).sum()
        assert chi2 < stats.chi2.ppf(0.99, df=n)


class TestConfig:
    def test_build(self):
        model = UmdaConfig().build(8, np.random.default_rng(0))
        assert isinstance(model, MarginalModel) and model.n == 8
