import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from emcor.metric import (
    MetricError,
    MetricSpec,
    Similarity,
    apply_similarity,
    distance,
    hilbert_cube_embed,
    load_matrix,
    pair_metric,
    pairwise_matrix,
)

EUC = MetricSpec.euclidean()
MAN = MetricSpec.manhattan()
DISC = MetricSpec.discrete()


class TestDistance:
    def test_three_four_five(self):
        assert distance(MetricSpec.euclidean(2), (0, 0), (3, 4)) == 5.0

    @pytest.mark.parametrize("m", [EUC, MAN, DISC])
    def test_identity(self, m):
        assert distance(m, (1.5, -2.0), (1.5, -2.0)) == 0.0

    def test_manhattan(self):
        assert distance(MetricSpec.manhattan(2), (1, 4), (2, 2)) == 3.0

    def test_discrete(self):
        assert distance(DISC, (0, 1), (0, 2)) == 1.0
        assert distance(DISC, 7, 7) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(MetricError, match="mismatch"):
            distance(MetricSpec.euclidean(2), (0, 0, 0), (1, 1, 1))
        with pytest.raises(MetricError, match="mismatch"):
            distance(EUC, (0, 0), (1, 1, 1))

    def test_precomputed_index(self):
        m = MetricSpec.precomputed([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
        assert distance(m, 0, 2) == 2.0
        with pytest.raises(MetricError, match="out of range"):
            distance(m, 0, 3)


class TestPrecomputed:
    def test_rejects_asymmetric(self):
        with pytest.raises(MetricError, match="symmetric"):
            MetricSpec.precomputed([[0, 1], [2, 0]])

    def test_rejects_diagonal(self):
        with pytest.raises(MetricError, match="diagonal"):
            MetricSpec.precomputed([[1, 1], [1, 0]])

    def test_rejects_triangle_violation(self):
        with pytest.raises(MetricError, match="triangle"):
            MetricSpec.precomputed([[0, 1, 5], [1, 0, 1], [5, 1, 0]])

    def test_load_csv_and_json(self, tmp_path):
        grid = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
        (tmp_path / "d.csv").write_text("\n".join(",".join(map(str, r)) for r in grid))
        (tmp_path / "d.json").write_text(json.dumps({"n": 3, "d": grid}))
        assert np.array_equal(load_matrix(tmp_path / "d.csv"), grid)
        assert np.array_equal(load_matrix(tmp_path / "d.json"), grid)

    def test_load_json_wrong_n(self, tmp_path):
        (tmp_path / "d.json").write_text(json.dumps({"n": 2, "d": [[0]]}))
        with pytest.raises(MetricError):
            load_matrix(tmp_path / "d.json")


class TestPairMetric:
    def test_equal_pairs(self):
        assert pair_metric(EUC, EUC, (1, 4), (1, 4)) == 0.0

    def test_sum_of_margins(self):
        assert pair_metric(EUC, EUC, (1, 4), (2, 2)) == 3.0

    def test_first_required_property(self):
        assert pair_metric(DISC, DISC, (0, 0), (0, 1)) == distance(DISC, 0, 1) == 1.0

    @settings(max_examples=50)
    @given(arrays(float, 4, elements=st.floats(-100, 100)))
    def test_required_properties(self, v):
        x, y, u, w = v
        assert pair_metric(EUC, EUC, (x, u), (x, w)) == distance(EUC, u, w)
        assert pair_metric(EUC, EUC, (x, u), (y, u)) == distance(EUC, x, y)
        assert pair_metric(EUC, EUC, (x, x), (u, w)) >= distance(EUC, u, w) - 1e-12


class TestPairwise:
    def test_single_point(self):
        assert np.array_equal(pairwise_matrix(EUC, [3.0]), [[0.0]])

    def test_reals(self):
        d = pairwise_matrix(EUC, [1, 2, 3, 4])
        assert sorted(d[np.triu_indices(4, 1)]) == [1, 1, 1, 2, 2, 3]

    def test_discrete(self):
        assert np.array_equal(pairwise_matrix(DISC, [0, 1]), [[0, 1], [1, 0]])

    @pytest.mark.parametrize("kind", ["euclidean", "manhattan", "discrete"])
    def test_triangle_inequality(self, kind):
        rng = np.random.default_rng(3)
        pts = rng.integers(-3, 4, (40, 3)).astype(float) * rng.uniform(0.1, 2)
        d = pairwise_matrix(MetricSpec(kind, 3), pts)
        assert np.array_equal(d, d.T)
        assert np.all(np.diag(d) == 0)
        assert np.all(d[:, :, None] <= d[:, None, :] + d.T[None, :, :] + 1e-12)


class TestSimilarity:
    def test_identity(self):
        pts = np.array([[1.0, 2.0], [3.0, -1.0]])
        assert np.array_equal(apply_similarity(Similarity(1.0), MetricSpec.euclidean(2), pts), pts)

    def test_scale_and_shift(self):
        out = apply_similarity(Similarity(2.0, translation=3.0), EUC, [0, 1])
        assert out.ravel().tolist() == [3.0, 5.0]

    def test_rotation(self):
        q = np.array([[0.0, -1.0], [1.0, 0.0]])
        out = apply_similarity(Similarity(1.0, q), MetricSpec.euclidean(2), [(1, 0), (0, 0)])
        assert np.allclose(out, [[0, 1], [0, 0]], atol=1e-15)

    def test_rejects_non_orthogonal(self):
        with pytest.raises(MetricError, match="orthogonal"):
            Similarity(1.0, [[1.0, 1.0], [0.0, 1.0]])

    def test_rejects_precomputed_and_discrete(self):
        with pytest.raises(MetricError):
            apply_similarity(Similarity(1.0), MetricSpec.precomputed([[0]]), [0])
        with pytest.raises(MetricError):
            apply_similarity(Similarity(1.0), DISC, [0, 1])

    def test_manhattan_needs_signed_permutation(self):
        q = np.array([[0.6, -0.8], [0.8, 0.6]])
        with pytest.raises(MetricError, match="permutation"):
            apply_similarity(Similarity(1.0, q), MetricSpec.manhattan(2), [(1, 0)])
        swap = np.array([[0.0, -1.0], [1.0, 0.0]])
        out = apply_similarity(Similarity(2.0, swap), MetricSpec.manhattan(2), [(1, 0), (0, 3)])
        assert pairwise_matrix(MetricSpec.manhattan(2), out)[0, 1] == 8.0

    @pytest.mark.parametrize("seed", range(5))
    def test_distances_scale_by_c(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.uniform(0, 2 * np.pi)
        q = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]]) @ np.diag([1, -1])
        s = Similarity(rng.uniform(0.1, 10), q, rng.normal(size=2))
        m = MetricSpec.euclidean(2)
        pts = rng.normal(size=(30, 2))
        before = pairwise_matrix(m, pts)
        after = pairwise_matrix(m, apply_similarity(s, m, pts))
        off = ~np.eye(30, dtype=bool)
        assert np.max(np.abs(after[off] / (s.scale * before[off]) - 1)) <= 1e-12


class TestHilbertCube:
    def test_formula(self):
        img = hilbert_cube_embed(EUC, [0, 1, 2])
        assert np.allclose(img[0], [0, 0.5 / 2, (2 / 3) / 3], rtol=0, atol=1e-15)

    def test_anchor_coordinate_zero(self):
        img = hilbert_cube_embed(EUC, [5.0, 7.0], anchors=[5.0, 1.0])
        assert img[0, 0] == 0.0

    def test_coordinates_bounded(self):
        pts = np.random.default_rng(0).normal(size=(20, 2)) * 100
        img = hilbert_cube_embed(MetricSpec.euclidean(2), pts)
        assert np.all(img >= 0)
        assert np.all(img <= 1.0 / np.arange(1, 21))

    def test_injective_on_sample(self):
        pts = np.random.default_rng(1).normal(size=(15, 3))
        img = hilbert_cube_embed(MetricSpec.manhattan(3), pts)
        assert len(np.unique(img, axis=0)) == 15

    def test_truncation_and_empty(self):
        assert hilbert_cube_embed(EUC, [0, 1, 2], n_coords=2).shape == (3, 2)
        with pytest.raises(MetricError, match="anchor"):
            hilbert_cube_embed(EUC, [0, 1], anchors=np.empty(0))
