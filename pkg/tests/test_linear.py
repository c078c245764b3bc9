import numpy as np
import pytest

from emobench import classifiers, kernels
from emobench.classifiers.linear import (hinge_step, lr_update,
                                         softmax_scores)
from emobench.rng import stream
from emobench.sparse import CsrMatrix


def random_sparse(rng, n, v, density=0.4):
    dense = rng.normal(size=(n, v))
    dense[rng.random((n, v)) >= density] = 0.0
    rows = [{j: x for j, x in enumerate(row) if x != 0.0} for row in dense]
    return CsrMatrix.from_dicts(rows, v), dense


def test_lr_update_hand_formula():
    rng = stream(21, "linear")
    for _ in range(30):
        v = int(rng.integers(1, 8))
        w = rng.normal(size=v)
        x = rng.normal(size=v)
        b0 = float(rng.normal())
        y = float(rng.integers(0, 2))
        w_got = w.copy()
        b_got = lr_update(w_got, b0, x, y, 0.1)
        z = b0 + float(np.dot(w, x))
        p = 1.0 / (1.0 + np.exp(-z))
        g = 0.1 * (y - p) * p * (1.0 - p)
        assert np.allclose(w_got, w + g * x, atol=1e-12)
        assert b_got == pytest.approx(b0 + g, abs=1e-12)


def test_delta_epoch_matches_dense_steps():
    rng = stream(22, "linear")
    X, dense = random_sparse(rng, 30, 10)
    y01 = rng.integers(0, 2, size=30).astype(np.float64)
    order = rng.permutation(30)
    for backend in kernels.available_backends():
        mod = kernels.get_backend(backend)
        w = np.zeros(10)
        b0 = mod.delta_epoch(X.indptr, X.indices, X.data, y01, order, w, 0.0, 0.1)
        w_ref, b_ref = np.zeros(10), 0.0
        for i in order:
            b_ref = lr_update(w_ref, b_ref, dense[i], y01[i], 0.1)
        assert np.allclose(w, w_ref, atol=1e-9)
        assert b0 == pytest.approx(b_ref, abs=1e-9)


def test_softmax_epoch_matches_dense_steps():
    rng = stream(23, "linear")
    X, dense = random_sparse(rng, 25, 8)
    y = rng.integers(0, 5, size=25).astype(np.int32)
    order = rng.permutation(25)
    for backend in kernels.available_backends():
        mod = kernels.get_backend(backend)
        wmat = np.zeros((4, 8))
        bias = np.zeros(4)
        mod.softmax_delta_epoch(X.indptr, X.indices, X.data, y, order, wmat, bias, 0.1)
        w_ref, b_ref = np.zeros((4, 8)), np.zeros(4)
        for i in order:
            z = np.concatenate([w_ref @ dense[i] + b_ref, [0.0]])
            z -= z.max()
            p = np.exp(z)
            p /= p.sum()
            err = -p
            err[y[i]] += 1.0
            ep = float(err @ p)
            g = p[:4] * (err[:4] - ep)
            w_ref += 0.1 * np.outer(g, dense[i])
            b_ref += 0.1 * g
        assert np.allclose(wmat, w_ref, atol=1e-9)
        assert np.allclose(bias, b_ref, atol=1e-9)


def test_softmax_scores_reference_class():
    wmat = np.asarray([[1.0, 0.0], [0.0, -1.0]])
    bias = np.asarray([0.5, 0.0])
    x = np.asarray([1.0, 2.0])
    p = softmax_scores(wmat, bias, x)
    z = np.asarray([1.5, -2.0, 0.0])  # last class logit pinned to 0
    e = np.exp(z - z.max())
    assert np.allclose(p, e / e.sum(), atol=1e-12)


def test_hinge_step_reference():
    w = np.asarray([0.5, -0.5])
    b = hinge_step(w, 0.0, np.asarray([1.0, 1.0]), 1.0, eta=0.1, lam=0.01)
    # margin 0 < 1 so the step fires after the decay
    decayed = np.asarray([0.5, -0.5]) * (1 - 0.1 * 0.01)
    assert np.allclose(w, decayed + 0.1 * np.asarray([1.0, 1.0]), atol=1e-12)
    assert b == pytest.approx(0.1)
    w2 = np.asarray([5.0, 5.0])
    b2 = hinge_step(w2, 0.0, np.asarray([1.0, 1.0]), 1.0, eta=0.1, lam=0.01)
    # margin 10 >= 1: decay only, bias untouched
    assert np.allclose(w2, np.asarray([5.0, 5.0]) * (1 - 0.001), atol=1e-12)
    assert b2 == 0.0


def dense_sgd_reference(dense, ysign, orders, loss_code, eta0, decay, lam):
    w = np.zeros(dense.shape[1])
    b0, t = 0.0, 0
    for order in orders:
        for i in order:
            eta = eta0 / (1.0 + decay * t)
            if loss_code == 0:
                violated = ysign[i] * (b0 + float(w @ dense[i])) < 1.0
                w *= 1.0 - eta * lam
                if violated:
                    w += eta * ysign[i] * dense[i]
                    b0 += eta * ysign[i]
            else:
                p = 1.0 / (1.0 + np.exp(-(b0 + float(w @ dense[i]))))
                g = eta * ((ysign[i] + 1.0) / 2.0 - p)
                w += g * dense[i]
                b0 += g
            t += 1
    return w, b0, t


@pytest.mark.parametrize("loss_code,lam", [(0, 1e-3), (0, 0.0), (1, 0.0)])
def test_linear_sgd_epoch_matches_dense(loss_code, lam):
    rng = stream(24, "linear", loss_code)
    X, dense = random_sparse(rng, 30, 9)
    ysign = np.where(rng.integers(0, 2, size=30) == 1, 1.0, -1.0)
    orders = [rng.permutation(30) for _ in range(3)]
    w_ref, b_ref, t_ref = dense_sgd_reference(dense, ysign, orders, loss_code, 0.1, 0.01, lam)
    for backend in kernels.available_backends():
        mod = kernels.get_backend(backend)
        u = np.zeros(9)
        scale, b0, t = 1.0, 0.0, 0
        for order in orders:
            scale, b0, t = mod.linear_sgd_epoch(
                X.indptr, X.indices, X.data, ysign, order, u,
                scale, b0, t, loss_code, 0.1, 0.01, lam)
        assert t == t_ref
        assert np.allclose(scale * u, w_ref, atol=1e-9), backend
        assert b0 == pytest.approx(b_ref, abs=1e-9)


def test_eta_schedule_continues_across_epochs():
    # t keeps counting between epochs; watch the schedule through the decay
    # factor on a sample whose margin is never violated
    X = CsrMatrix.from_dicts([{0: 1.0}], 1)
    ysign = np.asarray([1.0])
    order = np.asarray([0], dtype=np.int64)
    u = np.asarray([5.0])
    scale, b0, t = 1.0, 0.0, 0
    scales = []
    for _ in range(3):
        scale, b0, t = kernels.linear_sgd_epoch(
            X.indptr, X.indices, X.data, ysign, order, u, scale, b0, t, 0, 1.0, 1.0, 0.1)
        scales.append(scale)
    assert t == 3
    assert b0 == 0.0
    # eta = 1/(1 + t) at t = 0, 1, 2
    expected = [1 - 0.1, (1 - 0.1) * (1 - 0.05), (1 - 0.1) * (1 - 0.05) * (1 - 0.1 / 3)]
    assert np.allclose(scales, expected, atol=1e-12)


def test_fit_is_deterministic(sep_data):
    kwargs = dict(config={"epochs": 5}, seed=11)
    for kind in ("logistic_regression", "linear_svm", "sgd_linear"):
        a = classifiers.fit(kind, sep_data["train_x"], sep_data["y_train"], **kwargs)
        b = classifiers.fit(kind, sep_data["train_x"], sep_data["y_train"], **kwargs)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.bias, b.bias)
        c = classifiers.fit(kind, sep_data["train_x"], sep_data["y_train"],
                            config={"epochs": 5}, seed=12)
        assert not np.array_equal(a.weights, c.weights)


def test_multinomial_mode(sep_data):
    model = classifiers.fit("logistic_regression", sep_data["train_x"], sep_data["y_train"],
                            {"mode": "multinomial", "epochs": 10}, seed=1)
    assert model.weights.shape[0] == 4  # last label is the softmax reference
    codes, scores = classifiers.predict_codes(model, sep_data["test_x"])
    assert np.allclose(scores.sum(axis=1), 1.0, atol=1e-9)
    assert float((codes == sep_data["y_test"]).mean()) >= 0.95
    with pytest.raises(ValueError):
        classifiers.fit("logistic_regression", sep_data["train_x"], sep_data["y_train"],
                        {"mode": "softmaxish"}, seed=1)


def test_ovr_scores_sum_to_one(sep_data):
    model = classifiers.fit("logistic_regression", sep_data["train_x"], sep_data["y_train"],
                            {"epochs": 5}, seed=1)
    _, scores = classifiers.predict_codes(model, sep_data["test_x"])
    assert np.allclose(scores.sum(axis=1), 1.0, atol=1e-9)


def test_svm_lambda_validation(sep_data):
    with pytest.raises(ValueError):
        classifiers.fit("linear_svm", sep_data["train_x"], sep_data["y_train"],
                        {"lambda": -1.0}, seed=1)
    with pytest.raises(ValueError):
        classifiers.fit("sgd_linear", sep_data["train_x"], sep_data["y_train"],
                        {"loss": "huber"}, seed=1)
