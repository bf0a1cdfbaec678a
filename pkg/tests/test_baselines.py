import numpy as np
import pytest

from emcor import PairedSample, empirical_ecor
from emcor.baselines import (
    distance_correlation,
    distance_covariance,
    distance_stats,
    double_center,
    pearson_correlation,
)
from emcor.errors import UndefinedCorrelationError


class TestDoubleCenter:
    def test_examples(self):
        assert np.array_equal(double_center([[0.0]]), [[0.0]])
        assert np.array_equal(double_center([[0, 1], [1, 0]]), [[-0.5, 0.5], [0.5, -0.5]])

    def test_means_vanish(self):
        d = np.abs(np.subtract.outer(*(2 * [np.random.default_rng(0).normal(size=30)])))
        a = double_center(d)
        assert np.max(np.abs(a.mean(axis=0))) < 1e-10
        assert np.max(np.abs(a.mean(axis=1))) < 1e-10

    def test_non_square(self):
        with pytest.raises(ValueError):
            double_center(np.zeros((2, 3)))


class TestDistanceCovariance:
    def test_diagonal_pair(self):
        assert distance_covariance(PairedSample([0, 1], [0, 1])) == pytest.approx(0.5, abs=1e-12)
        assert distance_correlation(PairedSample([0, 1], [0, 1])) == pytest.approx(1.0, abs=1e-12)

    def test_constant_x(self):
        s = PairedSample([3, 3, 3], [1, 2, 5])
        assert distance_covariance(s) == 0
        assert distance_stats(s)["dcor"] is None
        with pytest.raises(UndefinedCorrelationError):
            distance_correlation(s)

    def test_independent_grid(self, grid4):
        assert distance_covariance(grid4) == pytest.approx(0, abs=1e-12)

    def test_affine_image(self):
        x = np.random.default_rng(1).normal(size=25)
        assert distance_correlation(PairedSample(x, 2 * x + 3)) == pytest.approx(1, abs=1e-9)

    def test_too_small(self):
        with pytest.raises(ValueError):
            distance_covariance(PairedSample([1], [1]))

    @pytest.mark.parametrize("seed", range(5))
    def test_invariances(self, seed):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=(2, 20))
        base = distance_correlation(PairedSample(x, y))
        assert 0 <= base <= 1 + 1e-9
        assert distance_correlation(PairedSample(3 * x - 7, y)) == pytest.approx(base, abs=1e-9)
        assert distance_covariance(PairedSample(y, x)) == pytest.approx(
            distance_covariance(PairedSample(x, y)), abs=1e-14
        )

    def test_multivariate_margin(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(15, 3))
        assert distance_correlation(PairedSample(x, x @ rng.normal(size=(3, 3)))) > 0


class TestPearson:
    def test_signs(self):
        x = [1.0, 2.0, 4.0, 8.0]
        assert pearson_correlation(x, x) == pytest.approx(1)
        assert pearson_correlation(x, [-v for v in x]) == pytest.approx(-1)

    def test_constant(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson_correlation([1, 1, 1], [1, 2, 3])

    def test_indicator_table(self):
        x = [0, 0, 1, 1]
        assert pearson_correlation(x, x) == pytest.approx(1)

    @pytest.mark.parametrize("seed", range(20))
    def test_indicator_pearson_below_ecor(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 20))
        x = rng.integers(0, 2, n)
        y = np.where(rng.random(n) < 0.6, x, rng.integers(0, 2, n))
        if x.min() == x.max() or y.min() == y.max():
            pytest.skip("degenerate indicator draw")
        rho = pearson_correlation(x, y)
        assert abs(rho) <= empirical_ecor(PairedSample(x, y)) + 1e-9
