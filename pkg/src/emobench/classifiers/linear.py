"""The three linear families: logistic regression, linear SVM, plain SGD.

All train one-vs-rest binary units per label (logistic regression can
instead train a single softmax layer with the last label as reference
class). Sample order is reshuffled every epoch from a named stream, one
stream per unit, so per-label trainings are independent and reproducible.

Update rules:
  logistic_regression  w += lr * (y - p) * p * (1 - p) * x   (delta rule)
  linear_svm           hinge with weight decay (1 - eta*lam) each step
  sgd_linear           hinge or log loss, step eta0 / (1 + decay*t), no decay
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from emobench import kernels
from emobench.classifiers.base import sigmoid_rows, softmax_rows
from emobench.corpus import LABELS
from emobench.rng import stream
from emobench.sparse import CsrMatrix

LR_DEFAULTS = {"learning_rate": 0.1, "epochs": 100, "mode": "one_vs_rest"}
SVM_DEFAULTS = {"lambda": 1e-4, "epochs": 100, "eta0": 0.1, "decay": 0.01}
SGD_DEFAULTS = {"loss": "hinge", "epochs": 100, "eta0": 0.1, "decay": 0.01}


# --- single-sample reference updates (the epoch kernels loop these) ----------

def lr_update(w: np.ndarray, b0: float, x: np.ndarray, y: float, lr: float) -> float:
    """One dense delta-rule step in place; returns the new bias."""
    z = b0 + float(w @ x)
    p = 1.0 / (1.0 + np.exp(-z))
    g = lr * (y - p) * p * (1.0 - p)
    w += g * x
    return b0 + g


def hinge_step(w: np.ndarray, b0: float, x: np.ndarray, y: float,
               eta: float, lam: float) -> float:
    """One dense hinge step in place (y in {-1, +1}); returns the new bias."""
    violated = y * (b0 + float(w @ x)) < 1.0
    w *= 1.0 - eta * lam
    if violated:
        w += eta * y * x
        b0 += eta * y
    return b0


def softmax_scores(wmat: np.ndarray, bias: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Class probabilities with the last class as reference (logit 0)."""
    z = np.concatenate([wmat @ x + bias, [0.0]])
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


# --- models -------------------------------------------------------------------

@dataclass
class LinearModel:
    kind: str
    labels: tuple[str, ...]
    config: dict
    weights: np.ndarray   # (k, n_features); (k-1, ...) in multinomial mode
    bias: np.ndarray
    n_features: int
    score_kind: str       # "sigmoid_ovr" | "softmax" | "margin"

    def _raw(self, matrix: CsrMatrix) -> np.ndarray:
        out = np.empty((matrix.n_rows, self.weights.shape[0]))
        kernels.csr_matmat(matrix.indptr, matrix.indices, matrix.data,
                           np.ascontiguousarray(self.weights.T), out)
        return out + self.bias

    def predict_batch(self, matrix: CsrMatrix) -> tuple[np.ndarray, np.ndarray]:
        z = self._raw(matrix)
        if self.score_kind == "softmax":
            z = np.hstack([z, np.zeros((len(z), 1))])
            scores = softmax_rows(z)
        elif self.score_kind == "sigmoid_ovr":
            sig = sigmoid_rows(z)
            scores = sig / sig.sum(axis=1, keepdims=True)  # sigmoid is never 0
        else:
            scores = z
        return np.argmax(scores, axis=1).astype(np.int32), scores

    def to_params(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "n_features": self.n_features,
            "score_kind": self.score_kind,
        }

    @classmethod
    def from_params(cls, kind: str, params: dict, config: dict) -> "LinearModel":
        return cls(
            kind=kind, labels=LABELS, config=config,
            weights=np.asarray(params["weights"], dtype=np.float64),
            bias=np.asarray(params["bias"], dtype=np.float64),
            n_features=int(params["n_features"]),
            score_kind=params["score_kind"],
        )


def fit_logistic_regression(X: CsrMatrix, y: np.ndarray, config: dict, seed: int) -> LinearModel:
    lr = float(config["learning_rate"])
    epochs = int(config["epochs"])
    mode = config["mode"]
    if mode not in ("one_vs_rest", "multinomial"):
        raise ValueError(f"unknown logistic_regression mode {mode!r}")
    n, v = X.shape
    k = len(LABELS)
    if mode == "one_vs_rest":
        weights = np.zeros((k, v))
        bias = np.zeros(k)
        for c in range(k):
            rng = stream(seed, "logistic_regression", c)
            y01 = (y == c).astype(np.float64)
            b0 = 0.0
            for _ in range(epochs):
                order = rng.permutation(n)
                b0 = kernels.delta_epoch(X.indptr, X.indices, X.data,
                                         y01, order, weights[c], b0, lr)
            bias[c] = b0
        return LinearModel("logistic_regression", LABELS, config, weights, bias, v, "sigmoid_ovr")
    weights = np.zeros((k - 1, v))
    bias = np.zeros(k - 1)
    rng = stream(seed, "logistic_regression", "softmax")
    for _ in range(epochs):
        order = rng.permutation(n)
        kernels.softmax_delta_epoch(X.indptr, X.indices, X.data,
                                    y, order, weights, bias, lr)
    return LinearModel("logistic_regression", LABELS, config, weights, bias, v, "softmax")


def _fit_sgd_family(kind: str, X: CsrMatrix, y: np.ndarray, config: dict, seed: int,
                    loss_code: int, eta0: float, decay: float, lam: float,
                    epochs: int, score_kind: str) -> LinearModel:
    n, v = X.shape
    k = len(LABELS)
    weights = np.zeros((k, v))
    bias = np.zeros(k)
    for c in range(k):
        rng = stream(seed, kind, c)
        ysign = np.where(y == c, 1.0, -1.0)
        u = np.zeros(v)
        scale, b0, t = 1.0, 0.0, 0
        for _ in range(epochs):
            order = rng.permutation(n)
            scale, b0, t = kernels.linear_sgd_epoch(
                X.indptr, X.indices, X.data, ysign, order,
                u, scale, b0, t, loss_code, eta0, decay, lam)
        weights[c] = scale * u
        bias[c] = b0
    return LinearModel(kind, LABELS, config, weights, bias, v, score_kind)


def fit_linear_svm(X: CsrMatrix, y: np.ndarray, config: dict, seed: int) -> LinearModel:
    lam = float(config["lambda"])
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    return _fit_sgd_family("linear_svm", X, y, config, seed, 0,
                           float(config["eta0"]), float(config["decay"]),
                           lam, int(config["epochs"]), "margin")


def fit_sgd_linear(X: CsrMatrix, y: np.ndarray, config: dict, seed: int) -> LinearModel:
    loss = config["loss"]
    if loss not in ("hinge", "log"):
        raise ValueError(f"unknown sgd_linear loss {loss!r}")
    score_kind = "margin" if loss == "hinge" else "sigmoid_ovr"
    return _fit_sgd_family("sgd_linear", X, y, config, seed,
                           0 if loss == "hinge" else 1,
                           float(config["eta0"]), float(config["decay"]),
                           0.0, int(config["epochs"]), score_kind)
