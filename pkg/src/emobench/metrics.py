"""Confusion matrix and the scores derived from it.

Rows are true labels, columns are predictions, both in the fixed label
order. Any zero-denominator score is defined as 0 rather than an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from emobench.corpus import LABEL_INDEX, LABELS


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # shape (5, 5), rows true, cols predicted

    def __post_init__(self):
        if self.counts.shape != (len(LABELS), len(LABELS)):
            raise ValueError(f"confusion matrix must be {len(LABELS)}x{len(LABELS)}")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(y_true: Sequence[str], y_pred: Sequence[str]) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if len(y_true) == 0:
        raise ValueError("cannot build a confusion matrix from zero pairs")
    counts = np.zeros((len(LABELS), len(LABELS)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        counts[LABEL_INDEX[t], LABEL_INDEX[p]] += 1
    return ConfusionMatrix(counts)


def precision(cm: ConfusionMatrix, label: str) -> float:
    """TP / column total; 0 when the label was never predicted."""
    i = LABEL_INDEX[label]
    denom = int(cm.counts[:, i].sum())
    return int(cm.counts[i, i]) / denom if denom else 0.0


def recall(cm: ConfusionMatrix, label: str) -> float:
    """TP / row total; 0 when the label never occurs in y_true."""
    i = LABEL_INDEX[label]
    denom = int(cm.counts[i, :].sum())
    return int(cm.counts[i, i]) / denom if denom else 0.0


def f1_score(cm: ConfusionMatrix, label: str) -> float:
    p, r = precision(cm, label), recall(cm, label)
    return 2 * p * r / (p + r) if p + r else 0.0


def accuracy(cm: ConfusionMatrix) -> float:
    return float(np.trace(cm.counts)) / cm.total


def macro_average(per_label: Mapping[str, float]) -> float:
    """Unweighted mean over the five labels; every label must be present."""
    missing = [name for name in LABELS if name not in per_label]
    if missing:
        raise ValueError(f"macro average missing label(s): {', '.join(missing)}")
    return sum(per_label[name] for name in LABELS) / len(LABELS)


def per_label_scores(cm: ConfusionMatrix) -> dict[str, dict[str, float]]:
    return {
        name: {
            "precision": precision(cm, name),
            "recall": recall(cm, name),
            "f1": f1_score(cm, name),
        }
        for name in LABELS
    }
