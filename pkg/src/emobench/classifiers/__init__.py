"""Uniform fit/predict interface over the eight classifier kinds."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from emobench.classifiers import boosting, forest, knn, linear, naive_bayes, neural
from emobench.classifiers.base import PredictOutcome, merge_config, outcome_from_scores
from emobench.corpus import LABEL_INDEX, LABELS
from emobench.features import FeatureMatrix
from emobench.sparse import CsrMatrix, SparseRow

# fixed kind order; ranking ties and report rows follow it
KINDS = (
    "naive_bayes",
    "logistic_regression",
    "linear_svm",
    "sgd_linear",
    "knn",
    "random_forest",
    "gradient_boost",
    "bpn",
)

DEFAULT_CONFIGS = {
    "naive_bayes": naive_bayes.DEFAULTS,
    "logistic_regression": linear.LR_DEFAULTS,
    "linear_svm": linear.SVM_DEFAULTS,
    "sgd_linear": linear.SGD_DEFAULTS,
    "knn": knn.DEFAULTS,
    "random_forest": forest.DEFAULTS,
    "gradient_boost": boosting.DEFAULTS,
    "bpn": neural.DEFAULTS,
}

_FITTERS = {
    "naive_bayes": naive_bayes.fit_naive_bayes,
    "logistic_regression": linear.fit_logistic_regression,
    "linear_svm": linear.fit_linear_svm,
    "sgd_linear": linear.fit_sgd_linear,
    "knn": knn.fit_knn,
    "random_forest": forest.fit_random_forest,
    "gradient_boost": boosting.fit_gradient_boost,
    "bpn": neural.fit_bpn,
}

MODEL_FORMAT_VERSION = 1


def _as_matrix(features) -> CsrMatrix:
    return features.matrix if isinstance(features, FeatureMatrix) else features


def _as_codes(labels) -> np.ndarray:
    if isinstance(labels, np.ndarray) and labels.dtype.kind in "iu":
        return labels.astype(np.int32)
    return np.asarray([LABEL_INDEX[name] for name in labels], dtype=np.int32)


def fit(kind: str, features, labels: Sequence[str] | np.ndarray,
        config: dict | None = None, seed: int = 0):
    """Train one classifier. `features` is a FeatureMatrix or CsrMatrix whose
    rows align with `labels` (label names or codes)."""
    if kind not in _FITTERS:
        raise ValueError(f"unknown classifier kind {kind!r}; valid: {KINDS}")
    X = _as_matrix(features)
    y = _as_codes(labels)
    if X.n_rows == 0:
        raise ValueError("cannot fit on an empty training set")
    if X.n_rows != len(y):
        raise ValueError(f"feature rows ({X.n_rows}) != labels ({len(y)})")
    merged = merge_config(DEFAULT_CONFIGS[kind], config, kind)
    return _FITTERS[kind](X, y, merged, int(seed))


def predict(model, row: SparseRow) -> PredictOutcome:
    """Classify one sparse feature row."""
    if row.n_cols != model.n_features:
        raise ValueError(f"feature width {row.n_cols} != model width {model.n_features}")
    single = CsrMatrix(
        indptr=np.asarray([0, len(row.indices)], dtype=np.int64),
        indices=np.asarray(row.indices, dtype=np.int32),
        data=np.asarray(row.values, dtype=np.float64),
        shape=(1, row.n_cols),
    )
    codes, scores = model.predict_batch(single)
    return outcome_from_scores(int(codes[0]), scores[0])


def predict_codes(model, features) -> tuple[np.ndarray, np.ndarray]:
    """Batch path: (label codes, score matrix) for every row."""
    X = _as_matrix(features)
    if X.n_cols != model.n_features:
        raise ValueError(f"feature width {X.n_cols} != model width {model.n_features}")
    return model.predict_batch(X)


def save_model(model, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "labels": list(model.labels),
        "config": model.config,
        "params": model.to_params(),
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_model(path: str | Path):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {payload.get('format_version')!r}")
    kind = payload["kind"]
    config = payload["config"]
    params = payload["params"]
    if list(payload["labels"]) != list(LABELS):
        raise ValueError("model label order does not match this package")
    if kind == "naive_bayes":
        return naive_bayes.NaiveBayesModel.from_params(params, config)
    if kind in ("logistic_regression", "linear_svm", "sgd_linear"):
        return linear.LinearModel.from_params(kind, params, config)
    if kind == "knn":
        return knn.KnnModel.from_params(params, config)
    if kind == "random_forest":
        return forest.ForestModel.from_params(params, config)
    if kind == "gradient_boost":
        return boosting.BoostModel.from_params(params, config)
    if kind == "bpn":
        return neural.BpnModel.from_params(params, config)
    raise ValueError(f"unknown classifier kind {kind!r}")
