"""Shared classifier plumbing: outcomes, config merging, tie-breaks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from emobench.corpus import LABELS


@dataclass(frozen=True)
class PredictOutcome:
    label: str
    scores: dict[str, float]  # one entry per label, fixed order


def argmax_code(scores: np.ndarray) -> int:
    """First maximum, i.e. ties resolve to the earlier label in fixed order."""
    return int(np.argmax(scores))


def outcome_from_scores(code: int, scores: np.ndarray) -> PredictOutcome:
    return PredictOutcome(
        label=LABELS[code],
        scores={name: float(scores[i]) for i, name in enumerate(LABELS)},
    )


def merge_config(defaults: dict, override: dict | None, kind: str) -> dict:
    config = dict(defaults)
    for key, value in (override or {}).items():
        if key not in defaults:
            raise ValueError(f"unknown {kind} parameter {key!r}; valid: {sorted(defaults)}")
        config[key] = value
    return config


def sigmoid_rows(z: np.ndarray) -> np.ndarray:
    """Numerically safe elementwise logistic function."""
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax_rows(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)
