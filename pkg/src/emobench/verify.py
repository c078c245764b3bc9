"""Self-verification checks: oracle-based property checks that need no data,
plus reference-result checks that run against a converted dataset.

Each check returns a CheckResult; `bench verify` prints one line per check
and the acceptance test module asserts on the same functions. The reference
accuracy table bundled here is what the dataset checks compare against, with
a +/-5 percentage point tolerance, averaged over seeds 1..5.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from emobench import classifiers, harness, metrics
from emobench.classifiers import naive_bayes
from emobench.classifiers.linear import lr_update
from emobench.classifiers.neural import bpn_gradients, bpn_loss, init_params
from emobench.corpus import LABELS, Corpus, load_corpus, write_corpus
from emobench.features import (build_vocabulary, count_vector, fit_idf,
                               transform)
from emobench.preprocess import StopWordList, preprocess_corpus
from emobench.rng import stream
from emobench.synthetic import mixed_corpus, separable_corpus

# mean test accuracy (percent) each classifier is expected to reproduce
REFERENCE_ACCURACY = {
    "naive_bayes": 63.6,
    "logistic_regression": 66.58,
    "linear_svm": 64.66,
    "sgd_linear": 65.57,
    "knn": 57.81,
    "random_forest": 64.02,
    "gradient_boost": 58.54,
    "bpn": 71.27,
}
ACCURACY_TOLERANCE_PP = 5.0

# reference per-label score columns whose reported averages the metrics
# module must reproduce after rounding to two decimals
REFERENCE_SVM_PER_LABEL_PRECISION = (0.76, 0.54, 0.75, 0.67, 0.54)
REFERENCE_SVM_MACRO_PRECISION_2DP = 0.65
REFERENCE_LR_PER_LABEL_F1 = (0.76, 0.64, 0.73, 0.62, 0.57)
REFERENCE_LR_MACRO_F1_2DP = 0.66


@dataclass
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "skip"
    detail: str

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def _result(name: str, ok: bool, detail: str) -> CheckResult:
    return CheckResult(name, "pass" if ok else "fail", detail)


# --- criterion: metric scores match a brute-force tally ----------------------

def check_metrics_oracle() -> CheckResult:
    rng = stream(2024, "verify", "metrics")
    n = 1000
    y_true = [LABELS[i] for i in rng.integers(0, len(LABELS), size=n)]
    y_pred = [LABELS[i] for i in rng.integers(0, len(LABELS), size=n)]
    cm = metrics.confusion_matrix(y_true, y_pred)

    # independent tally: plain dict counting, no arrays
    tally: dict[tuple[str, str], int] = {}
    for t, p in zip(y_true, y_pred):
        tally[(t, p)] = tally.get((t, p), 0) + 1
    worst = 0.0
    for i, ti in enumerate(LABELS):
        for j, pj in enumerate(LABELS):
            if int(cm.counts[i, j]) != tally.get((ti, pj), 0):
                return _result("metrics match brute-force tally", False,
                               f"confusion[{ti},{pj}] differs")
    for name in LABELS:
        tp = tally.get((name, name), 0)
        pred_total = sum(tally.get((t, name), 0) for t in LABELS)
        true_total = sum(tally.get((name, p), 0) for p in LABELS)
        p_ref = tp / pred_total if pred_total else 0.0
        r_ref = tp / true_total if true_total else 0.0
        f_ref = 2 * p_ref * r_ref / (p_ref + r_ref) if p_ref + r_ref else 0.0
        worst = max(worst,
                    abs(metrics.precision(cm, name) - p_ref),
                    abs(metrics.recall(cm, name) - r_ref),
                    abs(metrics.f1_score(cm, name) - f_ref))
    acc_ref = sum(tally.get((name, name), 0) for name in LABELS) / n
    worst = max(worst, abs(metrics.accuracy(cm) - acc_ref))
    return _result("metrics match brute-force tally",
                   worst <= 1e-12, f"{n} pairs, max |diff| {worst:.2e}")


# --- criterion: feature values match double-loop recomputation ---------------

def check_feature_oracle() -> CheckResult:
    rng = stream(2024, "verify", "features")
    alphabet = [f"t{j}" for j in range(8)]
    for case in range(200):
        n_docs = int(rng.integers(1, 11))
        docs = []
        for _ in range(n_docs):
            length = int(rng.integers(0, 9))
            docs.append([alphabet[int(rng.integers(0, len(alphabet)))] for _ in range(length)])
        if all(len(d) == 0 for d in docs):
            docs[0] = [alphabet[0]]
        vocab = build_vocabulary(docs)
        counts = [count_vector(d, vocab) for d in docs]
        model = fit_idf(counts, vocab)

        # idf bounds
        ln_n = math.log(n_docs)
        if not all(0.0 <= v <= ln_n for v in model.idf):
            return _result("feature values match double-loop recomputation", False,
                           f"case {case}: idf out of [0, ln N]")
        # tf rows sum to 1
        tf = transform(docs, vocab, "tf")
        for i, doc in enumerate(docs):
            row = tf.row(i)
            if len(count_vector(doc, vocab)) == 0:
                if len(row.values) != 0:
                    return _result("feature values match double-loop recomputation",
                                   False, f"case {case}: empty doc has entries")
            elif abs(float(row.values.sum()) - 1.0) > 1e-9:
                return _result("feature values match double-loop recomputation",
                               False, f"case {case}: tf row {i} sums off 1")
        # tfidf equals the nested-loop recomputation exactly
        tfidf = transform(docs, vocab, "tfidf", model)
        for i, doc in enumerate(docs):
            got = dict(zip(tfidf.row(i).indices.tolist(), tfidf.row(i).values.tolist()))
            expected = {}
            total = sum(1 for tok in doc if tok in vocab.terms)
            for term, idx in vocab.terms.items():
                c = sum(1 for tok in doc if tok == term)
                if c == 0:
                    continue
                df = sum(1 for d in docs if term in d)
                value = (c / total) * math.log(n_docs / df)
                if value != 0.0:
                    expected[idx] = value
            if got != expected:
                return _result("feature values match double-loop recomputation",
                               False, f"case {case}: tfidf row {i} differs")
    return _result("feature values match double-loop recomputation", True,
                   "200 micro-corpora, exact")


# --- criterion: naive Bayes posteriors ----------------------------------------

def check_nb_oracle() -> CheckResult:
    rng = stream(2024, "verify", "nb")
    k, worst_sum = len(LABELS), 0.0
    for _ in range(1000):
        v = int(rng.integers(2, 9))
        prior = rng.random(k) + 0.01
        prior /= prior.sum()
        lik = rng.random((k, v)) + 0.01
        lik /= lik.sum(axis=1, keepdims=True)
        model = naive_bayes.NaiveBayesModel(
            labels=LABELS, config={"alpha": 1.0}, prior=prior,
            log_likelihood=np.log(lik), n_features=v)
        n_terms = int(rng.integers(1, 5))
        idx = np.sort(rng.choice(v, size=min(n_terms, v), replace=False)).astype(np.int32)
        vals = rng.integers(1, 4, size=len(idx)).astype(np.float64)
        from emobench.sparse import SparseRow
        post = naive_bayes.nb_posteriors(model, SparseRow(idx, vals, v))
        worst_sum = max(worst_sum, abs(float(post.sum()) - 1.0))
    if worst_sum > 1e-9:
        return _result("naive Bayes posteriors", False,
                       f"posterior sums drift {worst_sum:.2e}")

    # four-document oracle case, checked against exact rational arithmetic
    docs = [["happy", "joy"], ["happy", "smile"], ["fear", "dark"], ["dark", "scream"]]
    labels = ["joy", "joy", "fear", "fear"]
    vocab = build_vocabulary(docs)
    counts = transform(docs, vocab, "count")
    model = classifiers.fit("naive_bayes", counts, labels, {"alpha": 1.0}, seed=0)
    query = ["happy", "joy", "dark"]
    qrow = transform([query], vocab, "count").row(0)
    post = naive_bayes.nb_posteriors(model, qrow)

    total_docs = len(docs)
    v = vocab.size
    expected = []
    for name in LABELS:
        class_docs = [d for d, l in zip(docs, labels) if l == name]
        prior = Fraction(len(class_docs), total_docs)
        if prior == 0:
            expected.append(Fraction(0))
            continue
        class_total = sum(len(d) for d in class_docs)
        value = prior
        for tok in query:
            c = sum(d.count(tok) for d in class_docs)
            value *= Fraction(c + 1, class_total + v)
        expected.append(value)
    norm = sum(expected)
    expected = [e / norm for e in expected]
    worst = max(abs(float(e) - float(p)) for e, p in zip(expected, post))
    predicted = LABELS[int(np.argmax(post))]
    ok = worst <= 1e-12 and predicted == "joy"
    return _result("naive Bayes posteriors", ok,
                   f"sum drift {worst_sum:.2e}; toy case max |diff| {worst:.2e}, "
                   f"predicted {predicted}")


# --- criterion: gradients -----------------------------------------------------

def _flat_grad_check(params: dict, x: np.ndarray, y_code: int, eps: float) -> float:
    grads = bpn_gradients(params, x, y_code)
    worst = 0.0
    for key in ("w1", "b1", "w2", "b2"):
        arr = params[key]
        flat = arr.reshape(-1)
        gflat = grads[key].reshape(-1)
        for j in range(len(flat)):
            keep = flat[j]
            flat[j] = keep + eps
            up = bpn_loss(params, x, y_code)
            flat[j] = keep - eps
            down = bpn_loss(params, x, y_code)
            flat[j] = keep
            numeric = (up - down) / (2 * eps)
            a, b = float(gflat[j]), numeric
            diff = abs(a - b)
            if diff > 1e-9:
                worst = max(worst, diff / max(abs(a), abs(b), 1e-8))
    return worst


def check_gradients() -> CheckResult:
    rng = stream(2024, "verify", "grad")
    worst = 0.0
    for draw in range(50):
        v = int(rng.integers(3, 9))
        h = int(rng.integers(2, 6))
        k = len(LABELS)
        params = init_params(v, h, k, seed=int(rng.integers(0, 10_000)))
        for key in params:
            params[key] = params[key] + rng.normal(0, 0.3, size=params[key].shape)
        x = rng.normal(0, 1.0, size=v)
        x[rng.random(v) < 0.3] = 0.0
        y_code = int(rng.integers(0, k))
        worst = max(worst, _flat_grad_check(params, x, y_code, eps=1e-5))
    if worst > 1e-4:
        return _result("gradients", False, f"network gradient rel err {worst:.2e}")

    worst_lr = 0.0
    for _ in range(50):
        v = int(rng.integers(1, 9))
        w = rng.normal(0, 1, size=v)
        x = rng.normal(0, 1, size=v)
        b0 = float(rng.normal())
        y = float(rng.integers(0, 2))
        lr = 0.1
        w_got = w.copy()
        b_got = lr_update(w_got, b0, x, y, lr)
        # hand recomputation of the delta rule
        z = b0
        for j in range(v):
            z += w[j] * x[j]
        p = 1.0 / (1.0 + math.exp(-z))
        g = lr * (y - p) * p * (1.0 - p)
        w_ref = np.asarray([w[j] + g * x[j] for j in range(v)])
        b_ref = b0 + g
        worst_lr = max(worst_lr, abs(b_got - b_ref),
                       float(np.max(np.abs(w_got - w_ref))) if v else 0.0)
    ok = worst_lr <= 1e-12
    return _result("gradients", ok,
                   f"network rel err {worst:.2e}; delta-rule |diff| {worst_lr:.2e}")


# --- criterion: separable corpus ----------------------------------------------

def check_synthetic_separation() -> CheckResult:
    train, test = separable_corpus(100, 25, seed=7)
    stop = StopWordList.default()
    tok_train = [t.tokens for t in preprocess_corpus(train, stop)]
    tok_test = [t.tokens for t in preprocess_corpus(test, stop)]
    vocab = build_vocabulary(tok_train)
    idf = fit_idf([count_vector(d, vocab) for d in tok_train], vocab)
    train_counts = transform(tok_train, vocab, "count")
    test_counts = transform(tok_test, vocab, "count")
    train_x = transform(tok_train, vocab, "tfidf", idf)
    test_x = transform(tok_test, vocab, "tfidf", idf)
    y_train = [r.label for r in train.reviews]
    y_test = np.asarray([LABELS.index(r.label) for r in test.reviews])
    accs = {}
    for kind in classifiers.KINDS:
        xt = train_counts if kind == "naive_bayes" else train_x
        xe = test_counts if kind == "naive_bayes" else test_x
        model = classifiers.fit(kind, xt, y_train, None, seed=1)
        codes, _ = classifiers.predict_codes(model, xe)
        accs[kind] = float((codes == y_test).mean())
    bad = {k: round(a, 3) for k, a in accs.items() if a < 0.95}
    return _result("separable corpus accuracy",
                   not bad,
                   f"min accuracy {min(accs.values()):.3f}" if not bad else f"below 0.95: {bad}")


# --- criterion: CLI runs are deterministic -------------------------------------

_SMALL_RUN_CONFIG = """\
# shrunk configs keep the determinism check quick
random_forest.n_trees = 30
gradient_boost.n_rounds = 10
bpn.epochs = 10
bpn.hidden = 16
logistic_regression.epochs = 20
linear_svm.epochs = 20
sgd_linear.epochs = 20
knn.k = 5
"""


def _run_cli(args: list[str], env_extra: dict | None = None) -> str:
    env = dict(os.environ)
    env.update(env_extra or {})
    proc = subprocess.run([sys.executable, "-m", "emobench.cli", *args],
                          capture_output=True, text=True, env=env)
    if proc.returncode != 0:
        raise RuntimeError(f"bench {' '.join(args)} failed:\n{proc.stderr}")
    return proc.stdout


def check_cli_determinism() -> CheckResult:
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        data = tmp_path / "synthetic.csv"
        write_corpus(mixed_corpus(30), data)
        cfg = tmp_path / "bench.cfg"
        cfg.write_text(_SMALL_RUN_CONFIG, encoding="utf-8")
        outputs = []
        for env_extra in (None, None, {"BENCH_THREADS": "1"}, {"BENCH_THREADS": "8"}):
            out = tmp_path / f"report{len(outputs)}.json"
            _run_cli(["run", "--data", str(data), "--config", str(cfg),
                      "--seeds", "1,2", "--format", "json", "--out", str(out)],
                     env_extra)
            payload = harness.zero_timing(json.loads(out.read_text(encoding="utf-8")))
            outputs.append(json.dumps(payload, sort_keys=False))
    ok = all(o == outputs[0] for o in outputs[1:])
    return _result("benchmark runs are deterministic", ok,
                   "two reruns and BENCH_THREADS 1 vs 8 byte-identical"
                   if ok else "outputs differ across runs or thread counts")


# --- criterion: reported macro averages are consistent --------------------------

def check_macro_consistency() -> CheckResult:
    svm = metrics.macro_average(dict(zip(LABELS, REFERENCE_SVM_PER_LABEL_PRECISION)))
    lr = metrics.macro_average(dict(zip(LABELS, REFERENCE_LR_PER_LABEL_F1)))
    ok = (round(svm, 2) == REFERENCE_SVM_MACRO_PRECISION_2DP
          and round(lr, 2) == REFERENCE_LR_MACRO_F1_2DP)
    return _result("reference macro averages consistent", ok,
                   f"macro precision {svm:.3f} -> {round(svm, 2)}, "
                   f"macro F1 {lr:.3f} -> {round(lr, 2)}")


# --- dataset-dependent checks ---------------------------------------------------

def reference_runs(data_path: str | Path, seeds=(1, 2, 3, 4, 5)) -> dict[int, dict]:
    """Per-seed evaluation reports for every classifier on the given corpus."""
    corpus = load_corpus(data_path)
    runs: dict[int, dict] = {}
    for seed in seeds:
        config = harness.ExperimentConfig(dataset_path=str(data_path), seed=seed)
        report = harness.run_experiment(config, corpus=corpus)
        runs[seed] = {kind: entry.report for kind, entry in report.classifiers.items()}
    return runs


def check_reference_accuracy(runs: dict[int, dict]) -> CheckResult:
    rows = []
    ok = True
    for kind, target in REFERENCE_ACCURACY.items():
        mean_acc = 100.0 * sum(r[kind].accuracy for r in runs.values()) / len(runs)
        delta = mean_acc - target
        if abs(delta) > ACCURACY_TOLERANCE_PP:
            ok = False
        rows.append(f"{kind} {mean_acc:.2f} (target {target}, delta {delta:+.2f})")
    return _result("reference accuracies within tolerance", ok, "; ".join(rows))


def check_result_ordering(runs: dict[int, dict]) -> CheckResult:
    problems = []
    for seed, reports in runs.items():
        acc = {kind: reports[kind].accuracy for kind in REFERENCE_ACCURACY}
        if acc["logistic_regression"] <= acc["knn"]:
            problems.append(f"seed {seed}: logistic_regression <= knn")
        bottom_two = sorted(acc, key=lambda k: acc[k])[:2]
        if set(bottom_two) != {"knn", "gradient_boost"}:
            problems.append(f"seed {seed}: bottom two are {bottom_two}")
        for kind, report in reports.items():
            if not 0.50 <= report.macro_f1 <= 0.75:
                problems.append(f"seed {seed}: {kind} macro F1 {report.macro_f1:.3f}")
    return _result("per-seed orderings hold", not problems,
                   "; ".join(problems) if problems else f"{len(runs)} seeds checked")


# --- driver ---------------------------------------------------------------------

def run_all(data_path: str | Path | None = None) -> list[CheckResult]:
    results = [
        check_metrics_oracle(),
        check_feature_oracle(),
        check_nb_oracle(),
        check_gradients(),
        check_synthetic_separation(),
        check_cli_determinism(),
        check_macro_consistency(),
    ]
    if data_path is None:
        results.append(CheckResult("reference accuracies within tolerance", "skip",
                                   "no dataset given (use --data)"))
        results.append(CheckResult("per-seed orderings hold", "skip",
                                   "no dataset given (use --data)"))
    else:
        runs = reference_runs(data_path)
        results.append(check_reference_accuracy(runs))
        results.append(check_result_ordering(runs))
    return results
