import math

import numpy as np
import pytest

from emcor import PairedSample, empirical_ecov
from emcor.errors import UndefinedCorrelationError
from emcor.inference import (
    mc_validate_cube,
    mc_validate_gaussian,
    p_value,
    permutation_test_ecov,
    replicate_rng,
)


def test_replicate_streams_are_stable_and_distinct():
    a = replicate_rng(5, 3).random(4)
    assert np.array_equal(a, replicate_rng(5, 3).random(4))
    assert not np.array_equal(a, replicate_rng(5, 4).random(4))
    assert not np.array_equal(a, replicate_rng(6, 3).random(4))


class TestPValue:
    def test_add_one(self):
        assert p_value(1.0, [0.5] * 19) == 1 / 20
        assert p_value(1.0, [2.0] * 19) == 1.0

    def test_ties_count(self):
        assert p_value(0.3, [0.1 + 0.2] + [0.0] * 18) == 2 / 20

    def test_order_insensitive(self):
        stats = np.random.default_rng(0).random(99)
        assert p_value(0.5, stats) == p_value(0.5, stats[::-1])


class TestPermutationTest:
    def test_strong_dependence(self):
        x = np.arange(20.0)
        r = permutation_test_ecov(PairedSample(x, x), 199, seed=1)
        assert r.p_value <= 0.01
        assert r.permutations == 199 and r.seed == 1

    def test_independent_grid(self, grid4):
        r = permutation_test_ecov(grid4, 19, seed=0)
        assert r.observed_statistic == 0 and r.p_value == 1.0

    def test_deterministic_and_parallel_invariant(self):
        rng = np.random.default_rng(2)
        s = PairedSample(rng.normal(size=10), rng.normal(size=10))
        a = permutation_test_ecov(s, 39, seed=9, keep_replicates=True)
        b = permutation_test_ecov(s, 39, seed=9, keep_replicates=True)
        c = permutation_test_ecov(s, 39, seed=9, workers=3, keep_replicates=True)
        assert a.to_dict() == b.to_dict() == c.to_dict()

    def test_identity_permutation_reproduces_observed(self):
        rng = np.random.default_rng(4)
        s = PairedSample(rng.normal(size=8), rng.normal(size=8))
        assert empirical_ecov(s.with_y(s.y[np.arange(8)])) == empirical_ecov(s)

    def test_p_value_formula(self):
        rng = np.random.default_rng(5)
        s = PairedSample(rng.normal(size=8), rng.normal(size=8))
        r = permutation_test_ecov(s, 19, seed=3, keep_replicates=True)
        hits = sum(v >= r.observed_statistic - 1e-12 for v in r.replicates)
        assert r.p_value == (1 + hits) / 20
        assert 0 < r.p_value <= 1

    def test_errors(self):
        with pytest.raises(ValueError):
            permutation_test_ecov(PairedSample([0, 1, 2], [0, 1, 2]), 19)
        with pytest.raises(ValueError):
            permutation_test_ecov(PairedSample([0, 1, 2, 3], [0, 1, 2, 3]), 18)
        with pytest.raises(UndefinedCorrelationError):
            permutation_test_ecov(PairedSample([0, 1, 2, 3], [1, 1, 1, 1]), 19)


class TestGaussian:
    def test_strong_correlation(self):
        g = mc_validate_gaussian(0.9, n=30, replicates=10, seed=0)
        assert g.mean >= g.lower_bound - 0.15
        assert g.mean <= g.upper_bound + 0.15
        assert len(g.values) == 10 and g.q05 <= g.median <= g.q95

    def test_moderate_correlation(self):
        g = mc_validate_gaussian(0.6, n=30, replicates=10, seed=0)
        assert g.mean <= math.sqrt(0.2) + 0.15

    @pytest.mark.xfail(strict=True, reason="plug-in eCor at n=30 sits near 0.4 under independence")
    def test_independence_mean_below_quarter(self):
        assert mc_validate_gaussian(0.0, n=30, replicates=20, seed=0).mean < 0.25

    def test_errors(self):
        with pytest.raises(ValueError):
            mc_validate_gaussian(1.0)
        with pytest.raises(ValueError):
            mc_validate_gaussian(0.5, n=5)


class TestCube:
    def test_one_dimension(self):
        c = mc_validate_cube(1, draws=200_000, seed=0)
        assert abs(c.estimate - 1 / 3) <= 3 * c.stderr
        assert c.quadrature == pytest.approx(1 / 3, abs=1e-6)

    def test_three_dimensions_in_bounds(self):
        c = mc_validate_cube(3, draws=100_000, seed=1)
        assert math.sqrt(3) / 3 <= c.estimate <= math.sqrt(0.5)
        assert (c.lower_bound, c.upper_bound) == pytest.approx((math.sqrt(3) / 3, math.sqrt(0.5)))

    def test_errors(self):
        with pytest.raises(ValueError):
            mc_validate_cube(0)
        with pytest.raises(ValueError):
            mc_validate_cube(2, draws=100)
