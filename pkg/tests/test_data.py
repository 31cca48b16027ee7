import numpy as np
import pytest

from lasec.data import (
    DriftScenario,
    ParseError,
    ReferenceSequence,
    ShiftSpec,
    apply_label_shifts,
    generate_synthetic_drift,
    load_dataset,
    save_dense_csv,
)


class TestSyntheticDrift:
    def test_default_scenario_has_twenty_segments(self):
        stream, ref = generate_synthetic_drift(DriftScenario(seed=0))
        assert len(stream) == 10000 and stream.dim == 50
        changes = np.sum(np.any(np.diff(ref.U, axis=0) != 0.0, axis=1))
        assert changes == 19  # 20 segments, 19 boundaries

    def test_single_segment_has_no_drift(self):
        _, ref = generate_synthetic_drift(
            DriftScenario(T=500, d=5, segment_length=500, seed=1)
        )
        assert ref.total_drift() == 0.0

    def test_labels_consistent_with_reference(self):
        stream, ref = generate_synthetic_drift(
            DriftScenario(T=2000, d=8, segment_length=250, seed=2)
        )
        raw = np.einsum("td,td->t", stream.X, ref.U)
        assert np.all(stream.y * raw >= 0.0)
        assert set(np.unique(stream.y)) <= {-1, 1}

    def test_byte_identical_replay(self):
        scen = DriftScenario(T=300, d=4, segment_length=100, seed=77)
        s1, r1 = generate_synthetic_drift(scen)
        s2, r2 = generate_synthetic_drift(scen)
        assert s1.X.tobytes() == s2.X.tobytes()
        assert s1.y.tobytes() == s2.y.tobytes()
        assert r1.U.tobytes() == r2.U.tobytes()

    def test_drift_equals_boundary_sum(self):
        _, ref = generate_synthetic_drift(
            DriftScenario(T=1000, d=6, segment_length=200, seed=3)
        )
        boundaries = range(199, 1000 - 1, 200)
        expected = sum(
            float(np.sum((ref.U[i + 1] - ref.U[i]) ** 2)) for i in boundaries
        )
        assert ref.total_drift() == pytest.approx(expected)

    def test_scenario_validation(self):
        with pytest.raises(ValueError):
            DriftScenario(T=0)


class TestReferenceSequence:
    def test_drift_over_subset(self):
        U = np.array([[0.0], [1.0], [1.0], [4.0]])
        ref = ReferenceSequence(U=U)
        assert ref.total_drift() == pytest.approx(1.0 + 0.0 + 9.0)
        assert ref.drift_over([0, 3]) == pytest.approx(16.0)
        assert ref.drift_over([2]) == 0.0


class TestLoadDataset:
    def test_dense_smoke(self, tmp_path):
        path = tmp_path / "tiny.csv"
        path.write_text("1,0.5,-0.25\n-1,1.5,2.0\n1,0.0,3.0\n")
        X, labels = load_dataset(path)
        assert X.shape == (3, 2)
        np.testing.assert_allclose(labels, [1, -1, 1])
        np.testing.assert_allclose(X[1], [1.5, 2.0])

    def test_malformed_line_reports_lineno(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,0.5,2.0\n-1,oops,2.0\n")
        with pytest.raises(ParseError, match=":2:"):
            load_dataset(path)

    def test_inconsistent_dimension(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1,0.5,2.0\n-1,1.0\n")
        with pytest.raises(ParseError, match=":2:"):
            load_dataset(path)

    def test_sparse_format(self, tmp_path):
        path = tmp_path / "sparse.txt"
        path.write_text("3 1:0.5 4:2.0\n7 2:-1.0\n")
        X, labels = load_dataset(path, fmt="sparse-index-value")
        assert X.shape == (2, 4)
        np.testing.assert_allclose(X[0], [0.5, 0.0, 0.0, 2.0])
        np.testing.assert_allclose(X[1], [0.0, -1.0, 0.0, 0.0])
        np.testing.assert_allclose(labels, [3, 7])

    def test_sparse_rejects_zero_index(self, tmp_path):
        path = tmp_path / "sparse0.txt"
        path.write_text("1 0:0.5\n")
        with pytest.raises(ParseError, match=":1:"):
            load_dataset(path, fmt="sparse-index-value")

    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((20, 7))
        labels = rng.choice([-1.0, 1.0], size=20)
        path = tmp_path / "rt.csv"
        save_dense_csv(path, X, labels)
        X2, labels2 = load_dataset(path)
        np.testing.assert_allclose(X2, X, atol=1e-12)
        np.testing.assert_array_equal(labels2, labels)

    def test_digit_corpus_shape(self, tmp_path):
        """A full-size digit-style file (9298 x 256, labels 0-9) loads with
        the documented shape."""
        rng = np.random.default_rng(5)
        path = tmp_path / "digits.csv"
        n, d = 9298, 256
        labels = rng.integers(0, 10, size=n)
        X = rng.standard_normal((n, d)).astype(np.float32)
        with open(path, "w") as fh:
            for i in range(n):
                fh.write(str(labels[i]) + "," + ",".join(f"{v:.4f}" for v in X[i]) + "\n")
        X2, labels2 = load_dataset(path)
        assert X2.shape == (9298, 256)
        assert set(np.unique(labels2)) == set(range(10))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            load_dataset(tmp_path / "x", fmt="parquet")


class TestLabelShifts:
    @staticmethod
    def _toy(n=2000, seed=6):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, 3))
        labels = rng.integers(0, 10, size=n)
        return X, labels

    def test_degenerate_subsets_rejected(self):
        with pytest.raises(ValueError):
            ShiftSpec(classes=tuple(range(4)), subsets=((0, 1, 2, 3),))
        with pytest.raises(ValueError):
            ShiftSpec(classes=tuple(range(4)), subsets=((),))

    def test_tiny_universe_rejected(self):
        with pytest.raises(ValueError):
            ShiftSpec(classes=(1,))

    def test_complementary_subsets_flip_labels(self):
        X, labels = self._toy()
        spec = ShiftSpec(
            segment_length=1000,
            classes=tuple(range(10)),
            subsets=((0, 1, 2, 3, 4), (5, 6, 7, 8, 9)),
            shuffle=False,
        )
        stream, subsets = apply_label_shifts(X, labels, spec)
        assert subsets == [{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}]
        first = stream.y[:1000]
        second = stream.y[1000:]
        # same raw labels relabeled through complementary subsets flip
        np.testing.assert_array_equal(
            np.where(np.isin(labels[:1000], [0, 1, 2, 3, 4]), 1, -1), first
        )
        np.testing.assert_array_equal(
            np.where(np.isin(labels[1000:], [0, 1, 2, 3, 4]), -1, 1), second
        )

    def test_positive_fraction_tracks_subset_size(self):
        """Per segment, the +1 fraction sits within 3 sigma of |subset|/10."""
        X, labels = self._toy(n=5000, seed=7)
        spec = ShiftSpec(segment_length=500, classes=tuple(range(10)), seed=8)
        stream, subsets = apply_label_shifts(X, labels, spec)
        for i, subset in enumerate(subsets):
            seg = stream.y[i * 500 : (i + 1) * 500]
            p = len(subset) / 10
            sigma = np.sqrt(500 * p * (1 - p))
            assert abs(np.sum(seg == 1) - 500 * p) <= 3 * sigma

    def test_labels_outside_universe_rejected(self):
        X, labels = self._toy()
        spec = ShiftSpec(classes=tuple(range(5)))
        with pytest.raises(ValueError):
            apply_label_shifts(X, labels, spec)

    def test_deterministic_given_seed(self):
        X, labels = self._toy()
        spec = ShiftSpec(segment_length=300, seed=9)
        s1, sub1 = apply_label_shifts(X, labels, spec)
        s2, sub2 = apply_label_shifts(X, labels, spec)
        assert s1.y.tobytes() == s2.y.tobytes()
        assert s1.X.tobytes() == s2.X.tobytes()
        assert sub1 == sub2

    def test_shuffle_flag(self):
        X, labels = self._toy()
        spec = ShiftSpec(segment_length=300, seed=9, shuffle=False)
        stream, _ = apply_label_shifts(X, labels, spec)
        np.testing.assert_array_equal(stream.X, X)
        spec_sh = ShiftSpec(segment_length=300, seed=9, shuffle=True)
        shuffled, _ = apply_label_shifts(X, labels, spec_sh)
        assert not np.array_equal(shuffled.X, X)
        # permutation, not mutation
        np.testing.assert_allclose(np.sort(shuffled.X, axis=0), np.sort(X, axis=0))
