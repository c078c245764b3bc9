"""Multinomial naive Bayes with Laplace smoothing, trained on raw counts.

All likelihood math runs in log space; only the final posterior is
exponentiated. Priors are stored as plain probabilities so that a label
absent from training keeps finite parameters (its posterior is exactly 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from emobench import kernels
from emobench.corpus import LABELS
from emobench.sparse import CsrMatrix, SparseRow

DEFAULTS = {"alpha": 1.0}


@dataclass
class NaiveBayesModel:
    kind = "naive_bayes"
    labels: tuple[str, ...]
    config: dict
    prior: np.ndarray          # (k,) class probabilities
    log_likelihood: np.ndarray  # (k, n_features) smoothed log P(term | class)
    n_features: int

    def predict_batch(self, matrix: CsrMatrix) -> tuple[np.ndarray, np.ndarray]:
        k = len(self.prior)
        joint = np.empty((matrix.n_rows, k))
        kernels.csr_matmat(matrix.indptr, matrix.indices, matrix.data,
                           np.ascontiguousarray(self.log_likelihood.T), joint)
        log_prior = np.full(k, -np.inf)
        present = self.prior > 0
        log_prior[present] = np.log(self.prior[present])
        joint += log_prior
        # normalize in log space; at least one class has a finite prior
        peak = joint.max(axis=1, keepdims=True)
        post = np.exp(joint - peak)
        post /= post.sum(axis=1, keepdims=True)
        return np.argmax(post, axis=1).astype(np.int32), post

    def to_params(self) -> dict:
        return {
            "prior": self.prior.tolist(),
            "log_likelihood": self.log_likelihood.tolist(),
            "n_features": self.n_features,
        }

    @classmethod
    def from_params(cls, params: dict, config: dict) -> "NaiveBayesModel":
        return cls(
            labels=LABELS,
            config=config,
            prior=np.asarray(params["prior"], dtype=np.float64),
            log_likelihood=np.asarray(params["log_likelihood"], dtype=np.float64),
            n_features=int(params["n_features"]),
        )


def fit_naive_bayes(X: CsrMatrix, y: np.ndarray, config: dict, seed: int) -> NaiveBayesModel:
    alpha = float(config["alpha"])
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    n, v = X.shape
    k = len(LABELS)
    # per-class term totals, accumulated entry-wise: O(nnz)
    entry_labels = np.repeat(y, np.diff(X.indptr).astype(np.int64))
    keys = entry_labels.astype(np.int64) * v + X.indices
    term_counts = np.bincount(keys, weights=X.data, minlength=k * v).reshape(k, v)
    class_totals = term_counts.sum(axis=1)
    log_lik = np.log(term_counts + alpha) - np.log(class_totals + alpha * v)[:, None]
    prior = np.bincount(y, minlength=k) / n
    return NaiveBayesModel(
        labels=LABELS, config=config, prior=prior,
        log_likelihood=log_lik, n_features=v,
    )


def nb_posteriors(model: NaiveBayesModel, row: SparseRow) -> np.ndarray:
    """Posterior P(class | document) for one count row; sums to 1."""
    single = CsrMatrix(
        indptr=np.asarray([0, len(row.indices)], dtype=np.int64),
        indices=np.asarray(row.indices, dtype=np.int32),
        data=np.asarray(row.values, dtype=np.float64),
        shape=(1, row.n_cols),
    )
    _, post = model.predict_batch(single)
    return post[0]
