"""Backpropagation network: one sigmoid hidden layer, softmax output.

Trained by per-sample SGD on cross-entropy. Weights start Xavier-uniform
from the (seed, "bpn", "init") stream (W1 drawn before W2, biases zero);
sample order reshuffles each epoch from (seed, "bpn", "shuffle").

bpn_forward / bpn_gradients are the dense reference implementations of the
same math the epoch kernel runs; the gradient checks exercise these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from emobench import kernels
from emobench.classifiers.base import softmax_rows
from emobench.corpus import LABELS
from emobench.rng import stream
from emobench.sparse import CsrMatrix

DEFAULTS = {"hidden": 64, "learning_rate": 0.01, "epochs": 50}


def init_params(n_features: int, hidden: int, n_classes: int, seed: int) -> dict:
    rng = stream(seed, "bpn", "init")
    lim1 = math.sqrt(6.0 / (n_features + hidden))
    w1 = rng.uniform(-lim1, lim1, size=(hidden, n_features))
    lim2 = math.sqrt(6.0 / (hidden + n_classes))
    w2 = rng.uniform(-lim2, lim2, size=(n_classes, hidden))
    return {"w1": w1, "b1": np.zeros(hidden), "w2": w2, "b2": np.zeros(n_classes)}


def bpn_forward(params: dict, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense forward pass; returns (hidden activations, class probabilities)."""
    hid = 1.0 / (1.0 + np.exp(-(params["w1"] @ x + params["b1"])))
    z = params["w2"] @ hid + params["b2"]
    z = z - z.max()
    e = np.exp(z)
    return hid, e / e.sum()


def bpn_loss(params: dict, x: np.ndarray, y_code: int) -> float:
    _, probs = bpn_forward(params, x)
    return -math.log(max(float(probs[y_code]), 1e-300))


def bpn_gradients(params: dict, x: np.ndarray, y_code: int) -> dict:
    """Analytic cross-entropy gradients for one sample, keyed like params."""
    hid, probs = bpn_forward(params, x)
    dz = probs.copy()
    dz[y_code] -= 1.0
    dh = params["w2"].T @ dz
    da = dh * hid * (1.0 - hid)
    return {
        "w2": np.outer(dz, hid),
        "b2": dz,
        "w1": np.outer(da, x),
        "b1": da,
    }


def bpn_step(params: dict, x: np.ndarray, y_code: int, lr: float) -> None:
    """One in-place SGD step on a dense sample."""
    grads = bpn_gradients(params, x, y_code)
    for key in params:
        params[key] -= lr * grads[key]


@dataclass
class BpnModel:
    kind = "bpn"
    labels: tuple[str, ...]
    config: dict
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    n_features: int
    train_loss: list[float]  # mean per-sample cross-entropy per epoch

    def predict_batch(self, matrix: CsrMatrix) -> tuple[np.ndarray, np.ndarray]:
        acts = np.empty((matrix.n_rows, self.w1.shape[0]))
        kernels.csr_matmat(matrix.indptr, matrix.indices, matrix.data,
                           np.ascontiguousarray(self.w1.T), acts)
        with np.errstate(over="ignore"):  # saturated units flush to 0/1
            hid = 1.0 / (1.0 + np.exp(-(acts + self.b1)))
        probs = softmax_rows(hid @ self.w2.T + self.b2)
        return np.argmax(probs, axis=1).astype(np.int32), probs

    def to_params(self) -> dict:
        return {
            "w1": self.w1.tolist(), "b1": self.b1.tolist(),
            "w2": self.w2.tolist(), "b2": self.b2.tolist(),
            "n_features": self.n_features, "train_loss": self.train_loss,
        }

    @classmethod
    def from_params(cls, params: dict, config: dict) -> "BpnModel":
        return cls(labels=LABELS, config=config,
                   w1=np.asarray(params["w1"], dtype=np.float64),
                   b1=np.asarray(params["b1"], dtype=np.float64),
                   w2=np.asarray(params["w2"], dtype=np.float64),
                   b2=np.asarray(params["b2"], dtype=np.float64),
                   n_features=int(params["n_features"]),
                   train_loss=[float(x) for x in params["train_loss"]])


def fit_bpn(X: CsrMatrix, y: np.ndarray, config: dict, seed: int) -> BpnModel:
    hidden = int(config["hidden"])
    lr = float(config["learning_rate"])
    epochs = int(config["epochs"])
    if hidden < 1:
        raise ValueError(f"hidden must be >= 1, got {hidden}")
    n, v = X.shape
    params = init_params(v, hidden, len(LABELS), seed)
    shuffle = stream(seed, "bpn", "shuffle")
    losses = []
    for _ in range(epochs):
        order = shuffle.permutation(n)
        total = kernels.bpn_epoch(X.indptr, X.indices, X.data, y, order,
                                  params["w1"], params["b1"],
                                  params["w2"], params["b2"], lr)
        losses.append(float(total) / n)
    return BpnModel(labels=LABELS, config=config,
                    w1=params["w1"], b1=params["b1"],
                    w2=params["w2"], b2=params["b2"],
                    n_features=v, train_loss=losses)
