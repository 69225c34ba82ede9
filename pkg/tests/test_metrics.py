"""Confusion metrics, balanced kappa pairing, and the divergence score."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mibci.metrics import (
    ConfusionMatrix,
    classwise_metrics,
    confusion,
    divergence,
    kappa_balanced,
)


class TestConfusion:
    def test_perfect_predictions_diagonal(self):
        cm = confusion([1, 2, 3], [1, 2, 3], 3)
        assert np.array_equal(cm.counts, np.eye(3, dtype=int))

    def test_swapped_pair_anti_diagonal(self):
        cm = confusion([1, 2], [2, 1], 2)
        assert np.array_equal(cm.counts, np.array([[0, 1], [1, 0]]))

    def test_row_sums_are_truth_counts(self):
        rng = np.random.default_rng(0)
        truth = rng.integers(1, 4, size=100)
        preds = rng.integers(1, 4, size=100)
        cm = confusion(preds, truth, 3)
        for c in range(1, 4):
            assert cm.counts[c - 1].sum() == (truth == c).sum()

    def test_label_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            confusion([1, 5], [1, 2], 4)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="equal-length"):
            confusion([1], [1, 2], 2)


class TestClasswise:
    def test_diagonal_gives_ones(self):
        report = classwise_metrics(ConfusionMatrix(np.diag([5, 7, 3])))
        for m in report.per_class:
            assert m.ppv == m.npv == m.sensitivity == m.f_measure == 1.0
        assert report.accuracy == 1.0
        assert report.kappa == 1.0
        assert report.undefined == ()

    def test_hand_oracle_case(self):
        cm = ConfusionMatrix(np.array([[8, 2], [1, 9]]))
        report = classwise_metrics(cm)
        c1 = report.per_class[0]
        assert c1.ppv == pytest.approx(8 / 9)
        assert c1.sensitivity == pytest.approx(0.8)
        assert c1.f_measure == pytest.approx(2 * (8 / 9) * 0.8 / ((8 / 9) + 0.8))
        assert report.accuracy == pytest.approx(17 / 20)

    def test_empty_predicted_column_flags_ppv(self):
        cm = ConfusionMatrix(np.array([[0, 3], [0, 5]]))
        report = classwise_metrics(cm)
        assert report.per_class[0].ppv == 0.0
        assert (1, "ppv") in report.undefined

    def test_label_permutation_permutes_entries(self):
        counts = np.array([[8, 2, 0], [1, 9, 2], [3, 0, 5]])
        base = classwise_metrics(ConfusionMatrix(counts))
        perm = [2, 0, 1]  # new class i is old class perm[i]
        permuted = classwise_metrics(ConfusionMatrix(counts[np.ix_(perm, perm)]))
        for new_idx, old_idx in enumerate(perm):
            assert permuted.per_class[new_idx] == base.per_class[old_idx]


class TestKappa:
    def test_printed_pairings(self):
        assert kappa_balanced(0.985, 2) == pytest.approx(0.97)
        assert kappa_balanced(0.965, 4) == pytest.approx(0.9533, abs=1e-4)
        assert kappa_balanced(1.0, 7) == 1.0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=2, max_value=40))
    def test_chance_level_is_zero(self, num_classes):
        assert kappa_balanced(1.0 / num_classes, num_classes) == pytest.approx(0.0, abs=1e-12)

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            kappa_balanced(1.2, 2)
        with pytest.raises(ValueError):
            kappa_balanced(0.5, 1)


class TestDivergence:
    def test_zero_when_class_means_coincide(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(20, 4))
        a -= a.mean(axis=0)
        features = np.vstack([a, a * 2.0])
        labels = np.array([1] * 20 + [2] * 20)
        assert abs(divergence(features, labels)) <= 1e-9

    def test_scalar_oracle_case(self):
        # 1-D, two classes: {-1,+1} and {3,5}; population covariances give
        # SW = 1 + 1 = 2, SB = var({0, 4}) = 4, ratio 2 (fixed by the
        # independent scalar oracle before the build)
        features = np.array([[-1.0], [1.0], [3.0], [5.0]])
        labels = np.array([1, 1, 2, 2])
        assert divergence(features, labels) == pytest.approx(2.0, rel=1e-12)

    def test_scaling_invariance(self):
        rng = np.random.default_rng(1)
        features = rng.normal(size=(30, 5)) + np.repeat([[0.0], [2.0]], 15, axis=0)
        labels = np.array([1] * 15 + [2] * 15)
        base = divergence(features, labels)
        scaled = divergence(features * 7.3, labels)
        assert scaled == pytest.approx(base, rel=1e-9)

    def test_invertible_linear_map_invariance(self):
        rng = np.random.default_rng(2)
        features = rng.normal(size=(40, 4)) + np.repeat([[0.0], [1.5]], 20, axis=0)
        labels = np.array([1] * 20 + [2] * 20)
        base = divergence(features, labels)
        for _ in range(5):
            a = rng.normal(size=(4, 4)) + 3 * np.eye(4)  # well-conditioned
            mapped = divergence(features @ a.T, labels)
            assert mapped == pytest.approx(base, rel=1e-6)

    def test_thin_class_rejected(self):
        with pytest.raises(ValueError, match=">= 2"):
            divergence(np.zeros((3, 2)), [1, 1, 2])

    def test_needs_two_classes(self):
        with pytest.raises(ValueError, match="two classes"):
            divergence(np.zeros((4, 2)), [1, 1, 1, 1])
