import numpy as np
import pytest

from emobench import classifiers
from emobench.classifiers.base import softmax_rows
from emobench.classifiers.boosting import boost_round
from emobench.rng import stream
from emobench.sparse import CsrMatrix


def small_problem(n=40, v=6, seed=51):
    rng = stream(seed, "boost")
    dense = rng.integers(0, 4, size=(n, v)).astype(np.float64)
    y = rng.integers(0, 5, size=n).astype(np.int32)
    rows = [{j: x for j, x in enumerate(r) if x != 0.0} for r in dense]
    return CsrMatrix.from_dicts(rows, v), y


def test_base_score_is_log_prior():
    X, y = small_problem()
    names = np.asarray(["joy", "fear", "sadness", "shame", "guilt"])[y]
    model = classifiers.fit("gradient_boost", X, names, {"n_rounds": 1}, seed=0)
    counts = np.bincount(y, minlength=5)
    assert np.allclose(model.base_score, np.log(counts / len(y)), atol=1e-12)


def test_absent_label_prior_uses_half_count_floor():
    X, _ = small_problem()
    names = np.full(X.n_rows, "joy")
    model = classifiers.fit("gradient_boost", X, names, {"n_rounds": 1}, seed=0)
    assert model.base_score[0] == pytest.approx(0.0, abs=1e-12)
    expected = np.log(0.5 / X.n_rows)
    assert np.allclose(model.base_score[1:], expected, atol=1e-12)
    assert np.isfinite(model.base_score).all()


def test_train_loss_tracks_rounds_and_decreases():
    X, y = small_problem()
    names = np.asarray(["joy", "fear", "sadness", "shame", "guilt"])[y]
    model = classifiers.fit("gradient_boost", X, names,
                            {"n_rounds": 15, "shrinkage": 0.3}, seed=0)
    assert len(model.train_loss) == 16
    assert model.train_loss[-1] < model.train_loss[0]
    drops = np.diff(model.train_loss)
    assert (drops <= 1e-9).all()  # each round may only improve the fit


def test_leaf_newton_step_hand_check():
    # one feature splitting rows {0,1} (value 0) from {2,3} (value 2): with
    # depth 1 each tree has exactly those leaves, so the leaf values are the
    # shrunken Newton steps over the residuals r = onehot - softmax(base)
    X = CsrMatrix.from_dicts([{}, {}, {0: 2.0}, {0: 2.0}], 1)
    y = np.asarray([0, 0, 1, 1], dtype=np.int32)
    k = 5
    base = np.log(np.maximum(np.bincount(y, minlength=k), 0.5) / 4)
    scores = np.tile(base, (4, 1))
    onehot = np.zeros((4, k))
    onehot[np.arange(4), y] = 1.0
    residuals = onehot - softmax_rows(scores.copy())

    trees = boost_round(X.to_csc(), 4, scores, onehot, 0.1, 1, 2,
                        np.asarray([0], dtype=np.int64))
    assert len(trees) == k
    for c in range(k):
        tree = trees[c]
        if c in (0, 1):
            # the residual flips sign between the groups, so the tree splits
            assert tree.n_nodes == 3
            groups = [np.asarray([0, 1]), np.asarray([2, 3])]
        else:
            # never-true labels carry a constant residual: nothing to split
            assert tree.n_nodes == 1
            groups = [np.arange(4)]
        got = tree.predict(X)
        for rows in groups:
            r = residuals[rows, c]
            absr = np.abs(r)
            gamma = (k - 1) / k * r.sum() / (absr * (1.0 - absr)).sum()
            assert got[rows[0]] == pytest.approx(0.1 * gamma, abs=1e-12)
            assert np.allclose(got[rows], got[rows[0]], atol=0)


def test_boost_round_advances_scores_by_leaf_values():
    X, y = small_problem(n=25)
    k = 5
    base = np.log(np.bincount(y, minlength=k) / 25)
    scores = np.tile(base, (25, 1))
    onehot = np.zeros((25, k))
    onehot[np.arange(25), y] = 1.0
    before = scores.copy()
    trees = boost_round(X.to_csc(), 25, scores, onehot, 0.1, 3, 2,
                        np.arange(X.n_cols, dtype=np.int64))
    for c, tree in enumerate(trees):
        assert np.allclose(before[:, c] + tree.predict(X), scores[:, c], atol=1e-12)


def test_zero_residuals_make_zero_trees():
    # scores already saturated toward the labels: residuals ~ 0 after pushing
    # the true-class score very high
    X = CsrMatrix.from_dicts([{0: 1.0}, {0: 2.0}], 1)
    y = np.asarray([0, 0], dtype=np.int32)
    scores = np.zeros((2, 5))
    scores[:, 0] = 800.0  # softmax saturates to exactly 1
    onehot = np.zeros((2, 5))
    onehot[:, 0] = 1.0
    trees = boost_round(X.to_csc(), 2, scores, onehot, 0.1, 2, 2,
                        np.asarray([0], dtype=np.int64))
    for tree in trees:
        assert np.allclose(tree.predict(X), 0.0)
    assert np.allclose(scores[:, 0], 800.0)


def test_decision_scores_are_base_plus_tree_sum():
    X, y = small_problem(n=20)
    names = np.asarray(["joy", "fear", "sadness", "shame", "guilt"])[y]
    model = classifiers.fit("gradient_boost", X, names,
                            {"n_rounds": 4, "shrinkage": 0.2}, seed=0)
    got = model.decision_scores(X)
    want = np.tile(model.base_score, (20, 1))
    for per_label in model.trees:
        for c, tree in enumerate(per_label):
            want[:, c] += tree.predict(X)
    assert np.array_equal(got, want)
    codes, probs = model.predict_batch(X)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    assert np.array_equal(codes, np.argmax(probs, axis=1).astype(np.int32))


def test_seed_does_not_change_fit():
    X, y = small_problem(n=30)
    names = np.asarray(["joy", "fear", "sadness", "shame", "guilt"])[y]
    a = classifiers.fit("gradient_boost", X, names, {"n_rounds": 3}, seed=1)
    b = classifiers.fit("gradient_boost", X, names, {"n_rounds": 3}, seed=99)
    assert a.train_loss == b.train_loss
    for ra, rb in zip(a.trees, b.trees):
        for ta, tb in zip(ra, rb):
            assert np.array_equal(ta.threshold, tb.threshold)
            assert np.array_equal(ta.leaf_value, tb.leaf_value)


def test_config_validation():
    X, y = small_problem(n=10)
    names = np.asarray(["joy", "fear", "sadness", "shame", "guilt"])[y]
    with pytest.raises(ValueError):
        classifiers.fit("gradient_boost", X, names, {"n_rounds": 0}, seed=0)
    with pytest.raises(ValueError):
        classifiers.fit("gradient_boost", X, names, {"shrinkage": 0.0}, seed=0)


def test_separable_accuracy(sep_data):
    model = classifiers.fit("gradient_boost", sep_data["train_x"], sep_data["y_train"],
                            {"n_rounds": 20, "shrinkage": 0.3}, seed=0)
    codes, _ = classifiers.predict_codes(model, sep_data["test_x"])
    assert float((codes == sep_data["y_test"]).mean()) >= 0.9


def test_save_load_roundtrip(tmp_path, sep_data):
    model = classifiers.fit("gradient_boost", sep_data["train_x"], sep_data["y_train"],
                            {"n_rounds": 3}, seed=0)
    path = tmp_path / "gb.json"
    classifiers.save_model(model, path)
    loaded = classifiers.load_model(path)
    c1, s1 = classifiers.predict_codes(model, sep_data["test_x"])
    c2, s2 = classifiers.predict_codes(loaded, sep_data["test_x"])
    assert np.array_equal(c1, c2)
    assert np.allclose(s1, s2, atol=1e-15)
    assert loaded.train_loss == model.train_loss
