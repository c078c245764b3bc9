"""k-nearest-neighbor classifier over sparse rows.

Fitting just stores the training matrix. Distances are cosine by default
(euclidean available). Neighbor order is distance ascending with training
row index as tie-break; an all-zero query is defined to be at distance 1
from everything, so the vote falls back to the k lowest-index rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from emobench import kernels
from emobench.corpus import LABELS
from emobench.sparse import CsrMatrix

DEFAULTS = {"k": 25, "distance": "cosine"}


def knn_vote(neighbor_codes: np.ndarray, neighbor_dists: np.ndarray,
             k: int, n_classes: int) -> tuple[int, np.ndarray]:
    """Plurality vote over the first k neighbors (assumed sorted).

    Vote ties go to the label holding the nearest neighbor among the tied
    labels; an exact distance tie there falls back to label order. Returns
    (winner, per-label vote counts).
    """
    take = min(k, len(neighbor_codes))
    if take == 0:
        raise ValueError("cannot vote with zero neighbors")
    counts = np.bincount(neighbor_codes[:take], minlength=n_classes)
    top = counts.max()
    tied = np.flatnonzero(counts == top)
    if len(tied) == 1:
        return int(tied[0]), counts
    best_dist = np.full(n_classes, np.inf)
    for i in range(take - 1, -1, -1):
        best_dist[neighbor_codes[i]] = neighbor_dists[i]
    winner = tied[0]
    for c in tied[1:]:
        if best_dist[c] < best_dist[winner]:
            winner = c
    return int(winner), counts


@dataclass
class KnnModel:
    kind = "knn"
    labels: tuple[str, ...]
    config: dict
    train: CsrMatrix
    train_codes: np.ndarray
    norms: np.ndarray
    n_features: int

    def _distances(self, q_dense: np.ndarray, q_norm: float) -> np.ndarray:
        dots = np.empty((self.train.n_rows, 1))
        kernels.csr_matmat(self.train.indptr, self.train.indices, self.train.data,
                           q_dense.reshape(-1, 1), dots)
        dots = dots[:, 0]
        if self.config["distance"] == "cosine":
            if q_norm == 0.0:
                return np.ones(self.train.n_rows)
            sims = np.zeros(self.train.n_rows)
            nz = self.norms > 0
            sims[nz] = dots[nz] / (q_norm * self.norms[nz])
            return 1.0 - sims
        d2 = q_norm * q_norm + self.norms * self.norms - 2.0 * dots
        return np.sqrt(np.maximum(d2, 0.0))

    def predict_batch(self, matrix: CsrMatrix) -> tuple[np.ndarray, np.ndarray]:
        k = int(self.config["k"])
        n_classes = len(LABELS)
        codes = np.empty(matrix.n_rows, dtype=np.int32)
        scores = np.empty((matrix.n_rows, n_classes))
        q_norms = matrix.row_norms()
        q_dense = np.zeros(self.n_features)
        take = min(k, self.train.n_rows)
        for i in range(matrix.n_rows):
            row = matrix.row(i)
            q_dense[row.indices] = row.values
            dists = self._distances(q_dense, float(q_norms[i]))
            q_dense[row.indices] = 0.0
            order = np.argsort(dists, kind="stable")[:take]
            code, counts = knn_vote(self.train_codes[order], dists[order], k, n_classes)
            codes[i] = code
            scores[i] = counts / take
        return codes, scores

    def to_params(self) -> dict:
        return {
            "indptr": self.train.indptr.tolist(),
            "indices": self.train.indices.tolist(),
            "data": self.train.data.tolist(),
            "train_codes": self.train_codes.tolist(),
            "n_features": self.n_features,
        }

    @classmethod
    def from_params(cls, params: dict, config: dict) -> "KnnModel":
        n_features = int(params["n_features"])
        indptr = np.asarray(params["indptr"], dtype=np.int64)
        train = CsrMatrix(
            indptr=indptr,
            indices=np.asarray(params["indices"], dtype=np.int32),
            data=np.asarray(params["data"], dtype=np.float64),
            shape=(len(indptr) - 1, n_features),
        )
        return cls(labels=LABELS, config=config, train=train,
                   train_codes=np.asarray(params["train_codes"], dtype=np.int32),
                   norms=train.row_norms(), n_features=n_features)


def fit_knn(X: CsrMatrix, y: np.ndarray, config: dict, seed: int) -> KnnModel:
    if int(config["k"]) < 1:
        raise ValueError(f"k must be >= 1, got {config['k']}")
    if config["distance"] not in ("cosine", "euclidean"):
        raise ValueError(f"unknown distance {config['distance']!r}")
    return KnnModel(labels=LABELS, config=config, train=X, train_codes=y.astype(np.int32),
                    norms=X.row_norms(), n_features=X.n_cols)
