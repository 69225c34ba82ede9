"""Confusion-matrix metrics, balanced kappa, and the feature divergence score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfusionMatrix",
    "ClassMetrics",
    "ClasswiseReport",
    "confusion",
    "classwise_metrics",
    "kappa_balanced",
    "divergence",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """C x C counts; rows index the true class, columns the predicted class."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (counts < 0).any():
            raise ValueError("confusion counts must be nonnegative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total)


def confusion(predictions, truth, num_classes: int) -> ConfusionMatrix:
    """Tally (true, predicted) label pairs into a C x C matrix."""
    predictions = np.asarray(predictions, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predictions.shape != truth.shape or predictions.ndim != 1:
        raise ValueError("predictions and truth must be equal-length 1-D label lists")
    for name, arr in (("predictions", predictions), ("truth", truth)):
        if arr.size and (arr.min() < 1 or arr.max() > num_classes):
            raise ValueError(f"{name} contain labels outside 1..{num_classes}")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (truth - 1, predictions - 1), 1)
    return ConfusionMatrix(counts=counts)


@dataclass(frozen=True)
class ClassMetrics:
    ppv: float
    npv: float
    sensitivity: float
    f_measure: float


@dataclass(frozen=True)
class ClasswiseReport:
    """Per-class predictive values plus overall accuracy and balanced kappa.

    ``undefined`` lists (class label, metric name) pairs whose denominator
    was zero; those metrics are reported as 0.0 rather than NaN.
    """

    per_class: tuple[ClassMetrics, ...]
    accuracy: float
    kappa: float
    undefined: tuple[tuple[int, str], ...] = ()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "kappa": self.kappa,
            "per_class": [vars(m) for m in self.per_class],
            "undefined": [list(u) for u in self.undefined],
        }


def kappa_balanced(accuracy: float, num_classes: int) -> float:
    """Chance-corrected accuracy against the balanced 1/C chance level."""
    if not 0 <= accuracy <= 1:
        raise ValueError("accuracy must lie in [0, 1]")
    if num_classes < 2:
        raise ValueError("num_classes must be >= 2")
    chance = 1.0 / num_classes
    return (accuracy - chance) / (1.0 - chance)


def classwise_metrics(cm: ConfusionMatrix) -> ClasswiseReport:
    """Per-class ppv/npv/sensitivity/F-measure from a confusion matrix.

    Zero-denominator metrics come back as 0.0 and are flagged in
    ``undefined`` so report consumers can tell them from true zeros.
    """
    counts = cm.counts
    total = cm.total
    if total == 0:
        raise ValueError("empty confusion matrix")
    per_class = []
    undefined: list[tuple[int, str]] = []

    def safe(num: float, den: float, label: int, name: str) -> float:
        if den == 0:
            undefined.append((label, name))
            return 0.0
        return num / den

    for c in range(cm.num_classes):
        tp = counts[c, c]
        fp = counts[:, c].sum() - tp
        fn = counts[c, :].sum() - tp
        tn = total - tp - fp - fn
        label = c + 1
        ppv = safe(tp, tp + fp, label, "ppv")
        npv = safe(tn, tn + fn, label, "npv")
        sens = safe(tp, tp + fn, label, "sensitivity")
        f = safe(2.0 * ppv * sens, ppv + sens, label, "f_measure")
        per_class.append(ClassMetrics(ppv=ppv, npv=npv, sensitivity=sens, f_measure=f))

    accuracy = cm.accuracy
    return ClasswiseReport(
        per_class=tuple(per_class),
        accuracy=accuracy,
        kappa=kappa_balanced(accuracy, cm.num_classes),
        undefined=tuple(undefined),
    )


def divergence(features: np.ndarray, labels, num_classes: int | None = None) -> float:
    """Class-separability score tr(SW^-1 SB) of labeled feature vectors.

    SW is the sum over classes of the population (1/n) covariance of each
    class's features; SB is the population covariance of the class mean
    vectors about the grand mean of class means. The score is invariant
    under any invertible linear map of the feature space. SW is ridge
    regularized with 1e-6 * trace/dim when its condition number exceeds
    1e12.

    Parameters
    ----------
    features : ndarray
        ``(n, dim)`` feature vectors.
    labels : array-like
        1-based class labels, every class with at least two vectors.
    num_classes : int, optional
        Defaults to the largest label present.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise ValueError("features must be (n, dim) with one label per row")
    if num_classes is None:
        num_classes = int(labels.max())
    if num_classes < 2:
        raise ValueError("divergence needs at least two classes")

    dim = features.shape[1]
    sw = np.zeros((dim, dim))
    means = []
    for c in range(1, num_classes + 1):
        rows = features[labels == c]
        if len(rows) < 2:
            raise ValueError(f"class {c} has {len(rows)} feature vectors, need >= 2")
        mu = rows.mean(axis=0)
        centered = rows - mu
        sw += centered.T @ centered / len(rows)
        means.append(mu)
    means = np.stack(means)
    grand = means.mean(axis=0)
    centered_means = means - grand
    sb = centered_means.T @ centered_means / num_classes

    trace = np.trace(sw)
    if trace <= 0:
        raise ValueError("within-class scatter has zero trace; features are degenerate")
    if np.linalg.cond(sw) > 1e12:
        sw = sw + (1e-6 * trace / dim) * np.eye(dim)
    return float(np.trace(np.linalg.solve(sw, sb)))
