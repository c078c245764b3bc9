"""CART decision trees over CSR features, shared by forest and boosting.

Nodes are processed depth-first, left child first, so any RNG driving the
per-node feature subsets is consumed in a fixed order. Sample rows live in
one array that split kernels partition in place; each leaf therefore owns a
contiguous slice, which boosting uses to relabel leaves without re-routing
rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from emobench import kernels
from emobench.sparse import CsrMatrix


@dataclass
class Tree:
    children_left: np.ndarray   # int32; -1 marks a leaf
    children_right: np.ndarray
    feature: np.ndarray         # int32; -1 on leaves
    threshold: np.ndarray
    leaf_value: np.ndarray      # class code for gini trees, real value for mse

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, matrix: CsrMatrix) -> np.ndarray:
        out = np.empty(matrix.n_rows)
        kernels.tree_predict(
            self.children_left, self.children_right, self.feature,
            self.threshold, self.leaf_value,
            matrix.indptr, matrix.indices, matrix.data, matrix.n_cols, out,
        )
        return out

    def to_params(self) -> dict:
        return {
            "children_left": self.children_left.tolist(),
            "children_right": self.children_right.tolist(),
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "leaf_value": self.leaf_value.tolist(),
        }

    @classmethod
    def from_params(cls, params: dict) -> "Tree":
        return cls(
            children_left=np.asarray(params["children_left"], dtype=np.int32),
            children_right=np.asarray(params["children_right"], dtype=np.int32),
            feature=np.asarray(params["feature"], dtype=np.int32),
            threshold=np.asarray(params["threshold"], dtype=np.float64),
            leaf_value=np.asarray(params["leaf_value"], dtype=np.float64),
        )


def grow_tree(
    csc: tuple[np.ndarray, np.ndarray, np.ndarray],
    n_rows: int,
    rows: np.ndarray,
    *,
    criterion: str,
    y: np.ndarray | None = None,
    weights: np.ndarray | None = None,
    n_classes: int = 0,
    targets: np.ndarray | None = None,
    max_depth: int | None = None,
    min_samples_split: float = 2,
    feature_sampler: Callable[[], np.ndarray] | None = None,
    all_features: np.ndarray | None = None,
) -> tuple[Tree, list[tuple[int, int, int]], np.ndarray]:
    """Grow one tree on the given distinct rows.

    criterion "gini" reads y/weights/n_classes (weights are bootstrap
    multiplicities, so node size is the weighted count); criterion "mse"
    reads targets with unit weights. Returns the tree, the (node, start, end)
    slice of every leaf, and the partitioned row array those slices index.
    """
    col_indptr, col_rows, col_vals = csc
    samples = np.asarray(rows, dtype=np.int32).copy()
    if len(samples) == 0:
        raise ValueError("cannot grow a tree on zero rows")
    pos = np.full(n_rows, -1, dtype=np.int32)
    pos[samples] = np.arange(len(samples), dtype=np.int32)

    cl: list[int] = []
    cr: list[int] = []
    feat: list[int] = []
    thr: list[float] = []
    val: list[float] = []

    def new_node() -> int:
        cl.append(-1)
        cr.append(-1)
        feat.append(-1)
        thr.append(0.0)
        val.append(0.0)
        return len(cl) - 1

    leaf_ranges: list[tuple[int, int, int]] = []
    stack = [(0, len(samples), 0, new_node())]
    while stack:
        start, end, depth, node = stack.pop()
        seg = samples[start:end]
        splittable = max_depth is None or depth < max_depth
        if criterion == "gini":
            counts = np.bincount(y[seg], weights=weights[seg], minlength=n_classes)
            total = counts.sum()
            val[node] = float(np.argmax(counts))  # first max: fixed label order
            if counts.max() == total or total < min_samples_split:
                splittable = False
        else:
            node_sum = float(targets[seg].sum())
            node_n = float(end - start)
            val[node] = node_sum / node_n
            if node_n < min_samples_split:
                splittable = False
        if splittable:
            features = feature_sampler() if feature_sampler is not None else all_features
            if criterion == "gini":
                f, t, _ = kernels.gini_best_split(
                    col_indptr, col_rows, col_vals, pos, start, end,
                    weights, y, counts, features)
            else:
                f, t, _ = kernels.mse_best_split(
                    col_indptr, col_rows, col_vals, pos, start, end,
                    targets, node_sum, node_n, features)
            if f >= 0:
                split = kernels.partition_node(
                    col_indptr, col_rows, col_vals, pos, samples, start, end, f, t)
                feat[node] = int(f)
                thr[node] = float(t)
                left, right = new_node(), new_node()
                cl[node], cr[node] = left, right
                stack.append((split, end, depth + 1, right))
                stack.append((start, split, depth + 1, left))
                continue
        leaf_ranges.append((node, start, end))

    tree = Tree(
        children_left=np.asarray(cl, dtype=np.int32),
        children_right=np.asarray(cr, dtype=np.int32),
        feature=np.asarray(feat, dtype=np.int32),
        threshold=np.asarray(thr, dtype=np.float64),
        leaf_value=np.asarray(val, dtype=np.float64),
    )
    return tree, leaf_ranges, samples
