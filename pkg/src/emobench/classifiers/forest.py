"""Random forest: bagged Gini CART trees with per-split feature subsets.

Every tree draws its bootstrap and feature subsets from a stream keyed by
(seed, "forest", tree_index), never from shared state, so results are
bit-identical no matter how many worker threads BENCH_THREADS allows.
Bootstrap duplicates are folded into integer sample weights, which keeps
node scans proportional to distinct rows.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from emobench.classifiers.tree import Tree, grow_tree
from emobench.corpus import LABELS
from emobench.rng import stream
from emobench.sparse import CsrMatrix

DEFAULTS = {"n_trees": 200, "max_depth": None, "min_samples_split": 2}


def worker_count(n_tasks: int) -> int:
    env = os.environ.get("BENCH_THREADS")
    workers = int(env) if env else min(8, os.cpu_count() or 1)
    if workers < 1:
        raise ValueError(f"BENCH_THREADS must be >= 1, got {workers}")
    return min(workers, n_tasks)


@dataclass
class ForestModel:
    kind = "random_forest"
    labels: tuple[str, ...]
    config: dict
    trees: list[Tree]
    n_features: int

    def predict_batch(self, matrix: CsrMatrix) -> tuple[np.ndarray, np.ndarray]:
        votes = np.zeros((matrix.n_rows, len(LABELS)))
        rows = np.arange(matrix.n_rows)
        for tree in self.trees:
            picked = tree.predict(matrix).astype(np.int64)
            votes[rows, picked] += 1.0
        scores = votes / len(self.trees)
        return np.argmax(scores, axis=1).astype(np.int32), scores

    def to_params(self) -> dict:
        return {"trees": [t.to_params() for t in self.trees], "n_features": self.n_features}

    @classmethod
    def from_params(cls, params: dict, config: dict) -> "ForestModel":
        return cls(labels=LABELS, config=config,
                   trees=[Tree.from_params(p) for p in params["trees"]],
                   n_features=int(params["n_features"]))


def fit_random_forest(X: CsrMatrix, y: np.ndarray, config: dict, seed: int) -> ForestModel:
    n_trees = int(config["n_trees"])
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    n, v = X.shape
    csc = X.to_csc()
    n_sub = max(1, math.ceil(math.sqrt(v)))

    def build(tree_index: int) -> Tree:
        rng = stream(seed, "forest", tree_index)
        draw = rng.integers(0, n, size=n)
        rows, counts = np.unique(draw, return_counts=True)
        weights = np.zeros(n)
        weights[rows] = counts
        tree, _, _ = grow_tree(
            csc, n, rows.astype(np.int32),
            criterion="gini", y=y, weights=weights, n_classes=len(LABELS),
            max_depth=config["max_depth"],
            min_samples_split=config["min_samples_split"],
            feature_sampler=lambda: rng.choice(v, size=n_sub, replace=False).astype(np.int64),
        )
        return tree

    workers = worker_count(n_trees)
    if workers == 1:
        trees = [build(t) for t in range(n_trees)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(build, range(n_trees)))
    return ForestModel(labels=LABELS, config=config, trees=trees, n_features=v)
