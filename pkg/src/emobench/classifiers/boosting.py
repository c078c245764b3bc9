"""Gradient boosting for multiclass: one shallow regression tree per label
per round, fit to softmax cross-entropy pseudo-residuals.

Scores start at the per-label log-priors. Each leaf takes a Newton step
(k-1)/k * sum(r) / sum(|r| * (1 - |r|)) over its training rows, scaled by the
fixed shrinkage factor; that scaled value is what the stored trees output.
Fitting is deterministic given (data, config): no subsampling is used, so the
seed only flows through for interface uniformity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from emobench.classifiers.base import softmax_rows
from emobench.classifiers.tree import Tree, grow_tree
from emobench.corpus import LABELS
from emobench.sparse import CsrMatrix

DEFAULTS = {"n_rounds": 100, "shrinkage": 0.1, "max_depth": 3, "min_samples_split": 2}


@dataclass
class BoostModel:
    kind = "gradient_boost"
    labels: tuple[str, ...]
    config: dict
    base_score: np.ndarray        # (k,) log-priors
    trees: list[list[Tree]]       # [round][label]
    n_features: int
    train_loss: list[float]       # cross-entropy before round 1, after each round

    def decision_scores(self, matrix: CsrMatrix) -> np.ndarray:
        scores = np.tile(self.base_score, (matrix.n_rows, 1))
        for per_label in self.trees:
            for c, tree in enumerate(per_label):
                scores[:, c] += tree.predict(matrix)
        return scores

    def predict_batch(self, matrix: CsrMatrix) -> tuple[np.ndarray, np.ndarray]:
        probs = softmax_rows(self.decision_scores(matrix))
        return np.argmax(probs, axis=1).astype(np.int32), probs

    def to_params(self) -> dict:
        return {
            "base_score": self.base_score.tolist(),
            "trees": [[t.to_params() for t in row] for row in self.trees],
            "n_features": self.n_features,
            "train_loss": self.train_loss,
        }

    @classmethod
    def from_params(cls, params: dict, config: dict) -> "BoostModel":
        return cls(labels=LABELS, config=config,
                   base_score=np.asarray(params["base_score"], dtype=np.float64),
                   trees=[[Tree.from_params(p) for p in row] for row in params["trees"]],
                   n_features=int(params["n_features"]),
                   train_loss=[float(x) for x in params["train_loss"]])


def _cross_entropy(probs: np.ndarray, y: np.ndarray) -> float:
    picked = np.maximum(probs[np.arange(len(y)), y], 1e-300)
    return float(-np.log(picked).sum())


def boost_round(csc, n: int, scores: np.ndarray, onehot: np.ndarray,
                shrinkage: float, max_depth: int,
                min_samples_split: int, all_features: np.ndarray) -> list[Tree]:
    """Fit one tree per label on the current pseudo-residuals and advance
    `scores` in place. Residuals all zero make every tree output 0."""
    k = onehot.shape[1]
    probs = softmax_rows(scores)
    residuals = onehot - probs
    round_trees = []
    for c in range(k):
        target = residuals[:, c]
        tree, leaf_ranges, samples = grow_tree(
            csc, n, np.arange(n, dtype=np.int32),
            criterion="mse", targets=target,
            max_depth=max_depth, min_samples_split=min_samples_split,
            all_features=all_features,
        )
        for node, start, end in leaf_ranges:
            rows = samples[start:end]
            r = target[rows]
            absr = np.abs(r)
            denom = float((absr * (1.0 - absr)).sum())
            if denom < 1e-150:
                gamma = 0.0
            else:
                gamma = (k - 1) / k * float(r.sum()) / denom
            tree.leaf_value[node] = shrinkage * gamma
            scores[rows, c] += tree.leaf_value[node]
        round_trees.append(tree)
    return round_trees


def fit_gradient_boost(X: CsrMatrix, y: np.ndarray, config: dict, seed: int) -> BoostModel:
    n_rounds = int(config["n_rounds"])
    shrinkage = float(config["shrinkage"])
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")
    if shrinkage <= 0:
        raise ValueError(f"shrinkage must be positive, got {shrinkage}")
    n, v = X.shape
    k = len(LABELS)
    csc = X.to_csc()
    class_counts = np.bincount(y, minlength=k)
    # absent labels get a floor instead of log(0)
    base = np.log(np.maximum(class_counts, 0.5) / n)
    scores = np.tile(base, (n, 1))
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0
    all_features = np.arange(v, dtype=np.int64)
    losses = [_cross_entropy(softmax_rows(scores), y)]
    trees = []
    for _ in range(n_rounds):
        trees.append(boost_round(csc, n, scores, onehot, shrinkage,
                                 int(config["max_depth"]),
                                 int(config["min_samples_split"]), all_features))
        losses.append(_cross_entropy(softmax_rows(scores), y))
    return BoostModel(labels=LABELS, config=config, base_score=base,
                      trees=trees, n_features=v, train_loss=losses)
