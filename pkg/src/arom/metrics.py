"""Evaluation metrics: accuracy, confusion counts, macro one-vs-rest AUC.

AUC uses the rank (Mann-Whitney) formulation with midranks for tied
scores, so it is invariant under any strictly monotone transform of the
score matrix. Classes without both a positive and a negative example are
skipped and reported rather than silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError


def accuracy(predictions: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of exact label matches."""
    pred = np.asarray(predictions)
    true = np.asarray(truth)
    if pred.shape != true.shape or pred.ndim != 1:
        raise DimensionMismatchError(
            f"predictions {pred.shape} and truth {true.shape} must be equal-length vectors"
        )
    if pred.size == 0:
        raise DegenerateInputError("cannot compute accuracy of zero samples")
    return float(np.mean(pred == true))


def _midranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their group."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def binary_auc(scores: np.ndarray, positives: np.ndarray) -> float:
    """Mann-Whitney AUC of one class against the rest."""
    ranks = _midranks(np.asarray(scores, dtype=np.float64))
    pos = np.asarray(positives, dtype=bool)
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateInputError("AUC needs at least one positive and one negative")
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def macro_auc(
    class_scores: np.ndarray, truth: np.ndarray
) -> tuple[float, list[int]]:
    """Unweighted mean of per-class one-vs-rest AUCs.

    Returns the macro AUC together with the class indices skipped for
    lacking a positive or negative example.
    """
    scores = np.asarray(class_scores, dtype=np.float64)
    true = np.asarray(truth)
    if scores.ndim != 2:
        raise DimensionMismatchError(f"class_scores must be 2-D, got shape {scores.shape}")
    if true.ndim != 1 or true.shape[0] != scores.shape[0]:
        raise DimensionMismatchError(
            f"truth shape {true.shape} does not match {scores.shape[0]} score rows"
        )
    if scores.shape[0] < 2:
        raise DegenerateInputError("macro AUC needs at least two samples")

    per_class: list[float] = []
    skipped: list[int] = []
    for c in range(scores.shape[1]):
        positives = true == c
        if positives.all() or not positives.any():
            skipped.append(c)
            continue
        per_class.append(binary_auc(scores[:, c], positives))
    if not per_class:
        raise DegenerateInputError("no class had both positives and negatives")
    return float(np.mean(per_class)), skipped


def confusion_matrix(
    predictions: np.ndarray, truth: np.ndarray, num_classes: int
) -> np.ndarray:
    """C x C count matrix; rows are true classes, columns predictions."""
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(truth, dtype=np.int64)
    if pred.shape != true.shape:
        raise DimensionMismatchError("predictions and truth must be equal length")
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (true, pred), 1)
    return matrix


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate evaluation result with the configuration that produced it."""

    accuracy: float
    macro_auc: float | None
    per_class_accuracy: np.ndarray
    confusion: np.ndarray
    auc_skipped_classes: tuple[int, ...] = ()
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_auc": self.macro_auc,
            "per_class_accuracy": self.per_class_accuracy.tolist(),
            "confusion": self.confusion.tolist(),
            "auc_skipped_classes": list(self.auc_skipped_classes),
            "config": self.config,
        }


def evaluate(
    predictions: np.ndarray,
    truth: np.ndarray,
    num_classes: int,
    class_scores: np.ndarray | None = None,
    config: dict | None = None,
) -> MetricsReport:
    """Accuracy, per-class accuracy, confusion, and (with scores) macro AUC."""
    matrix = confusion_matrix(predictions, truth, num_classes)
    row_totals = matrix.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(
            row_totals > 0, np.diag(matrix) / np.maximum(row_totals, 1), np.nan
        )
    auc_value = None
    skipped: tuple[int, ...] = ()
    if class_scores is not None:
        auc_value, skipped_list = macro_auc(class_scores, truth)
        skipped = tuple(skipped_list)
    return MetricsReport(
        accuracy=accuracy(predictions, truth),
        macro_auc=auc_value,
        per_class_accuracy=per_class,
        confusion=matrix,
        auc_skipped_classes=skipped,
        config=dict(config or {}),
    )
