"""Cross-backend contracts: fitted trees must match bit for bit, the
per-sample update kernels to float rounding."""

import numpy as np
import pytest

from emobench import classifiers, kernels

pytestmark = pytest.mark.skipif(
    "c" not in kernels.available_backends(),
    reason="compiled kernel extension not built")


@pytest.fixture
def restore_backend():
    before = kernels.active_backend()
    yield
    kernels.set_backend(before)


def fit_on(backend, kind, sep_data, config, seed=1):
    before = kernels.active_backend()
    kernels.set_backend(backend)
    try:
        train = sep_data["train_counts"] if kind == "naive_bayes" else sep_data["train_x"]
        return classifiers.fit(kind, train, sep_data["y_train"], config, seed)
    finally:
        kernels.set_backend(before)


def assert_same_tree(a, b):
    assert np.array_equal(a.children_left, b.children_left)
    assert np.array_equal(a.children_right, b.children_right)
    assert np.array_equal(a.feature, b.feature)
    assert np.array_equal(a.threshold, b.threshold)  # exact: no tolerance
    assert np.array_equal(a.leaf_value, b.leaf_value)


def test_registry(restore_backend):
    assert set(kernels.available_backends()) == {"python", "c"}
    kernels.set_backend("python")
    assert kernels.active_backend() == "python"
    kernels.set_backend("c")
    assert kernels.active_backend() == "c"
    with pytest.raises(ValueError, match="backend"):
        kernels.set_backend("fortran")
    mod = kernels.get_backend("python")
    assert mod.gini_best_split is not None


def test_forest_trees_bit_identical(sep_data):
    cfg = {"n_trees": 10, "max_depth": 7}
    py = fit_on("python", "random_forest", sep_data, cfg)
    cc = fit_on("c", "random_forest", sep_data, cfg)
    for ta, tb in zip(py.trees, cc.trees):
        assert_same_tree(ta, tb)


def test_boost_trees_bit_identical(sep_data):
    cfg = {"n_rounds": 5, "shrinkage": 0.2}
    py = fit_on("python", "gradient_boost", sep_data, cfg)
    cc = fit_on("c", "gradient_boost", sep_data, cfg)
    assert np.array_equal(py.base_score, cc.base_score)
    for ra, rb in zip(py.trees, cc.trees):
        for ta, tb in zip(ra, rb):
            assert_same_tree(ta, tb)
    # leaf values come from residual sums, identical through round one at
    # least; training losses stay within float noise end to end
    assert np.allclose(py.train_loss, cc.train_loss, rtol=1e-9)


@pytest.mark.parametrize("kind,cfg", [
    ("logistic_regression", {"epochs": 8}),
    ("logistic_regression", {"epochs": 8, "mode": "multinomial"}),
    ("linear_svm", {"epochs": 8}),
    ("sgd_linear", {"epochs": 8}),
    ("sgd_linear", {"epochs": 8, "loss": "log"}),
])
def test_linear_weights_agree_to_rounding(sep_data, kind, cfg):
    py = fit_on("python", kind, sep_data, cfg)
    cc = fit_on("c", kind, sep_data, cfg)
    assert np.allclose(py.weights, cc.weights, atol=1e-10)
    assert np.allclose(py.bias, cc.bias, atol=1e-10)


def test_bpn_weights_agree_to_rounding(sep_data):
    cfg = {"hidden": 8, "epochs": 4}
    py = fit_on("python", "bpn", sep_data, cfg)
    cc = fit_on("c", "bpn", sep_data, cfg)
    assert np.allclose(py.w1, cc.w1, atol=1e-9)
    assert np.allclose(py.w2, cc.w2, atol=1e-9)
    assert np.allclose(py.train_loss, cc.train_loss, rtol=1e-9)


def test_predictions_agree_across_backends(sep_data):
    # end to end: same fitted model queried under each backend
    model = fit_on("c", "random_forest", sep_data, {"n_trees": 10})
    before = kernels.active_backend()
    results = {}
    for backend in ("python", "c"):
        kernels.set_backend(backend)
        try:
            results[backend] = classifiers.predict_codes(model, sep_data["test_x"])
        finally:
            kernels.set_backend(before)
    assert np.array_equal(results["python"][0], results["c"][0])
    assert np.allclose(results["python"][1], results["c"][1], atol=1e-12)


def test_csr_matmat_agrees(sep_data):
    X = sep_data["train_x"].matrix
    dense = np.ascontiguousarray(
        np.linspace(-1, 1, X.n_cols * 3).reshape(X.n_cols, 3))
    outs = {}
    for backend in kernels.available_backends():
        mod = kernels.get_backend(backend)
        out = np.empty((X.n_rows, 3))
        mod.csr_matmat(X.indptr, X.indices, X.data, dense, out)
        outs[backend] = out
    assert np.allclose(outs["python"], outs["c"], atol=1e-12)
