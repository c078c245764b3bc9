"""Timing comparison between the compiled kernel backend and the pure-python
fallback. Fits every classifier kind once per backend on a synthetic corpus
and reports fit/predict wall-clock times plus prediction agreement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from emobench import classifiers, kernels
from emobench.corpus import LABELS
from emobench.features import build_vocabulary, count_vector, fit_idf, transform
from emobench.harness import measure_time
from emobench.preprocess import StopWordList, preprocess_corpus
from emobench.synthetic import separable_corpus

# smaller than the defaults so the pure-python pass stays bearable
_BENCH_OVERRIDES = {
    "logistic_regression": {"epochs": 30},
    "linear_svm": {"epochs": 30},
    "sgd_linear": {"epochs": 30},
    "random_forest": {"n_trees": 50},
    "gradient_boost": {"n_rounds": 20},
    "bpn": {"epochs": 10, "hidden": 32},
}


@dataclass
class KindTiming:
    fit_ms: float
    predict_ms: float
    codes: np.ndarray


def _prepared_matrices(train_per_label: int, test_per_label: int):
    train, test = separable_corpus(train_per_label, test_per_label, seed=7)
    stop = StopWordList.default()
    tok_train = [t.tokens for t in preprocess_corpus(train, stop)]
    tok_test = [t.tokens for t in preprocess_corpus(test, stop)]
    vocab = build_vocabulary(tok_train)
    idf = fit_idf([count_vector(d, vocab) for d in tok_train], vocab)
    return {
        "train_counts": transform(tok_train, vocab, "count"),
        "test_counts": transform(tok_test, vocab, "count"),
        "train_x": transform(tok_train, vocab, "tfidf", idf),
        "test_x": transform(tok_test, vocab, "tfidf", idf),
        "y_train": [r.label for r in train.reviews],
        "y_test": np.asarray([LABELS.index(r.label) for r in test.reviews]),
    }


def run_backend_benchmark(repeat: int = 1, train_per_label: int = 60,
                          test_per_label: int = 20) -> dict:
    """{backend: {kind: KindTiming}} over every available kernel backend."""
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    data = _prepared_matrices(train_per_label, test_per_label)
    results: dict[str, dict[str, KindTiming]] = {}
    original = kernels.active_backend()
    try:
        for backend in kernels.available_backends():
            kernels.set_backend(backend)
            per_kind: dict[str, KindTiming] = {}
            for kind in classifiers.KINDS:
                xt = data["train_counts"] if kind == "naive_bayes" else data["train_x"]
                xe = data["test_counts"] if kind == "naive_bayes" else data["test_x"]
                config = _BENCH_OVERRIDES.get(kind)
                fit_ms = predict_ms = float("inf")
                model = codes = None
                for _ in range(repeat):
                    model, ms = measure_time(
                        lambda: classifiers.fit(kind, xt, data["y_train"], config, seed=1))
                    fit_ms = min(fit_ms, ms)
                    (codes, _), ms = measure_time(
                        lambda: classifiers.predict_codes(model, xe))
                    predict_ms = min(predict_ms, ms)
                per_kind[kind] = KindTiming(fit_ms, predict_ms, codes)
            results[backend] = per_kind
    finally:
        kernels.set_backend(original)
    return results


def render(results: dict) -> str:
    backends = list(results)
    lines = [f"kernel backends: {', '.join(backends)}", ""]
    header = "| Classifier |"
    rule = "| --- |"
    for b in backends:
        header += f" {b} fit ms | {b} predict ms |"
        rule += " ---: | ---: |"
    if len(backends) > 1:
        header += " fit speedup | agreement |"
        rule += " ---: | --- |"
    lines += [header, rule]
    base = backends[0]
    for kind in classifiers.KINDS:
        row = f"| {kind} |"
        for b in backends:
            t = results[b][kind]
            row += f" {t.fit_ms:.1f} | {t.predict_ms:.1f} |"
        if len(backends) > 1:
            other = backends[1]
            tb, to = results[base][kind], results[other][kind]
            speed = to.fit_ms / tb.fit_ms if tb.fit_ms > 0 else float("inf")
            agree = float((tb.codes == to.codes).mean())
            row += f" {speed:.1f}x | {agree:.3f} |"
        lines.append(row)
    if len(backends) > 1:
        lines += ["", f"fit speedup is {backends[1]} time / {backends[0]} time; "
                      "agreement is the fraction of identical test predictions."]
    return "\n".join(lines)
