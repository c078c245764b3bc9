"""Experiment harness: run classifiers over splits, report, rank, recommend.

Preprocessing and vocabulary fitting happen once per split; every classifier
sees the same matrices (naive Bayes always trains on raw counts, everything
else on the configured scheme). Reports average over the requested seeds,
and over folds within a seed when cross-validation is on. Rankings sort by
mean accuracy, then macro F1, then fixed kind order.
"""

from __future__ import annotations

import json
import platform
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from emobench import classifiers, kernels, metrics
from emobench.classifiers import KINDS
from emobench.corpus import (LABELS, Corpus, SplitPlan, kfold_plans,
                             label_histogram, load_corpus, split)
from emobench.features import (FeatureMatrix, SCHEMES, build_vocabulary,
                               count_vector, fit_idf, transform)
from emobench.preprocess import StopWordList, preprocess_corpus

SCHEMA_VERSION = 1


@dataclass
class ExperimentConfig:
    dataset_path: str
    test_fraction: float = 0.2
    seed: int = 42
    seeds: tuple[int, ...] | None = None  # averaging seeds; None means (seed,)
    feature_scheme: str = "tfidf"
    fit_on_all: bool = False
    stratified: bool = False
    folds: int | None = None
    classifiers: tuple[str, ...] = KINDS
    stop_words_path: str | None = None
    overrides: dict = field(default_factory=dict)  # {kind: {param: value}}

    def effective_seeds(self) -> tuple[int, ...]:
        return tuple(self.seeds) if self.seeds else (self.seed,)

    def validate(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.feature_scheme not in SCHEMES:
            raise ValueError(f"unknown feature scheme {self.feature_scheme!r}")
        if self.folds is not None and self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")
        if not self.classifiers:
            raise ValueError("no classifiers requested")
        for kind in self.classifiers:
            if kind not in KINDS:
                raise ValueError(f"unknown classifier kind {kind!r}; valid: {KINDS}")
        for kind in self.overrides:
            if kind not in KINDS:
                raise ValueError(f"override for unknown classifier {kind!r}")
        if not self.effective_seeds():
            raise ValueError("need at least one seed")


@dataclass
class EvaluationReport:
    classifier: str
    n_test: float
    per_label: dict
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    cpu_time_train_ms: float
    cpu_time_predict_ms: float


@dataclass
class ClassifierResult:
    report: EvaluationReport
    accuracy_per_seed: list[float]
    accuracy_std: float
    confusion_total: list[list[int]]


@dataclass
class BenchmarkReport:
    schema_version: int
    environment: str
    dataset: str
    n_reviews: int
    label_counts: dict
    test_fraction: float
    seeds: list[int]
    feature_scheme: str
    fit_on_all: bool
    folds: int | None
    vocab_sizes: list[int]
    classifiers: dict  # kind -> ClassifierResult
    ranking: list[str]
    recommendation: list[str]


def measure_time(action: Callable):
    """Run action; return (its result, elapsed wall-clock milliseconds)."""
    t0 = time.perf_counter()
    result = action()
    return result, (time.perf_counter() - t0) * 1000.0


def environment_string() -> str:
    return (f"python {platform.python_version()}; numpy {np.__version__}; "
            f"{platform.platform()}; kernels={kernels.active_backend()}")


@dataclass
class PreparedFeatures:
    vocab_size: int
    train_counts: FeatureMatrix
    test_counts: FeatureMatrix
    train_x: FeatureMatrix
    test_x: FeatureMatrix


def prepare_features(tokenized, plan: SplitPlan, scheme: str, fit_on_all: bool) -> PreparedFeatures:
    """Vocabulary, idf, and matrices for one split.

    The vocabulary (and idf when the scheme needs it) is fit on the training
    documents only; fit_on_all widens the fit to every document, reproducing
    pipelines that vectorize before splitting.
    """
    docs = [t.tokens for t in tokenized]
    train_docs = [docs[i] for i in plan.train_indices]
    test_docs = [docs[i] for i in plan.test_indices]
    fit_docs = docs if fit_on_all else train_docs
    vocab = build_vocabulary(fit_docs)
    train_counts = transform(train_docs, vocab, "count")
    test_counts = transform(test_docs, vocab, "count")
    if scheme == "count":
        train_x, test_x = train_counts, test_counts
    else:
        model = None
        if scheme == "tfidf":
            model = fit_idf([count_vector(d, vocab) for d in fit_docs], vocab)
        train_x = transform(train_docs, vocab, scheme, model)
        test_x = transform(test_docs, vocab, scheme, model)
    return PreparedFeatures(vocab.size, train_counts, test_counts, train_x, test_x)


def _evaluate_one(kind: str, prepared: PreparedFeatures, y_train, y_test,
                  overrides: dict, seed: int) -> tuple[EvaluationReport, np.ndarray]:
    train_x = prepared.train_counts if kind == "naive_bayes" else prepared.train_x
    test_x = prepared.test_counts if kind == "naive_bayes" else prepared.test_x
    model, train_ms = measure_time(
        lambda: classifiers.fit(kind, train_x, y_train, overrides.get(kind), seed))
    (codes, _), predict_ms = measure_time(
        lambda: classifiers.predict_codes(model, test_x))
    cm = metrics.confusion_matrix([LABELS[c] for c in y_test], [LABELS[c] for c in codes])
    if cm.total != len(y_test):
        raise AssertionError("confusion total does not match the test split size")
    per_label = metrics.per_label_scores(cm)
    report = EvaluationReport(
        classifier=kind,
        n_test=float(len(y_test)),
        per_label=per_label,
        macro_precision=metrics.macro_average({n: s["precision"] for n, s in per_label.items()}),
        macro_recall=metrics.macro_average({n: s["recall"] for n, s in per_label.items()}),
        macro_f1=metrics.macro_average({n: s["f1"] for n, s in per_label.items()}),
        accuracy=metrics.accuracy(cm),
        cpu_time_train_ms=train_ms,
        cpu_time_predict_ms=predict_ms,
    )
    return report, cm.counts


def _mean_reports(kind: str, reports: Sequence[EvaluationReport]) -> EvaluationReport:
    def mean(get):
        return float(sum(get(r) for r in reports)) / len(reports)
    per_label = {
        name: {
            stat: mean(lambda r, n=name, s=stat: r.per_label[n][s])
            for stat in ("precision", "recall", "f1")
        }
        for name in LABELS
    }
    return EvaluationReport(
        classifier=kind,
        n_test=mean(lambda r: r.n_test),
        per_label=per_label,
        macro_precision=mean(lambda r: r.macro_precision),
        macro_recall=mean(lambda r: r.macro_recall),
        macro_f1=mean(lambda r: r.macro_f1),
        accuracy=mean(lambda r: r.accuracy),
        cpu_time_train_ms=mean(lambda r: r.cpu_time_train_ms),
        cpu_time_predict_ms=mean(lambda r: r.cpu_time_predict_ms),
    )


def rank_and_recommend(reports: dict[str, EvaluationReport]) -> tuple[list[str], list[str]]:
    """Accuracy descending, macro F1 breaking ties, kind order after that.
    The recommendation lists every kind tied with the head on both keys."""
    pos = {kind: i for i, kind in enumerate(KINDS)}
    ranking = sorted(reports, key=lambda k: (-reports[k].accuracy, -reports[k].macro_f1, pos[k]))
    head = reports[ranking[0]]
    recommendation = [k for k in ranking
                      if reports[k].accuracy == head.accuracy
                      and reports[k].macro_f1 == head.macro_f1]
    return ranking, recommendation


def run_experiment(config: ExperimentConfig,
                   corpus: Corpus | None = None,
                   stop_words: StopWordList | None = None) -> BenchmarkReport:
    """Execute the full benchmark described by config and build its report."""
    config.validate()
    if corpus is None:
        corpus = load_corpus(config.dataset_path)
    if stop_words is None:
        stop_words = (StopWordList.from_file(config.stop_words_path)
                      if config.stop_words_path else StopWordList.default())
    tokenized = preprocess_corpus(corpus, stop_words)
    codes = corpus.label_codes()
    seeds = config.effective_seeds()
    kinds = tuple(config.classifiers)

    per_seed: dict[str, list[EvaluationReport]] = {k: [] for k in kinds}
    acc_per_seed: dict[str, list[float]] = {k: [] for k in kinds}
    confusion: dict[str, np.ndarray] = {k: np.zeros((len(LABELS), len(LABELS)), dtype=np.int64)
                                        for k in kinds}
    vocab_sizes: list[int] = []
    for seed in seeds:
        if config.folds:
            plans = kfold_plans(len(corpus), config.folds, seed)
        else:
            plans = [split(len(corpus), config.test_fraction, seed,
                           codes if config.stratified else None)]
        fold_reports: dict[str, list[EvaluationReport]] = {k: [] for k in kinds}
        for plan in plans:
            prepared = prepare_features(tokenized, plan, config.feature_scheme, config.fit_on_all)
            vocab_sizes.append(prepared.vocab_size)
            y_train = codes[plan.train_indices]
            y_test = codes[plan.test_indices]
            for kind in kinds:
                report, cm = _evaluate_one(kind, prepared, y_train, y_test,
                                           config.overrides, seed)
                fold_reports[kind].append(report)
                confusion[kind] += cm
        for kind in kinds:
            seed_report = (fold_reports[kind][0] if len(fold_reports[kind]) == 1
                           else _mean_reports(kind, fold_reports[kind]))
            per_seed[kind].append(seed_report)
            acc_per_seed[kind].append(seed_report.accuracy)

    results: dict[str, ClassifierResult] = {}
    averaged: dict[str, EvaluationReport] = {}
    for kind in kinds:
        averaged[kind] = (per_seed[kind][0] if len(per_seed[kind]) == 1
                          else _mean_reports(kind, per_seed[kind]))
        results[kind] = ClassifierResult(
            report=averaged[kind],
            accuracy_per_seed=[float(a) for a in acc_per_seed[kind]],
            accuracy_std=float(np.std(acc_per_seed[kind])),
            confusion_total=confusion[kind].tolist(),
        )
    ranking, recommendation = rank_and_recommend(averaged)
    return BenchmarkReport(
        schema_version=SCHEMA_VERSION,
        environment=environment_string(),
        dataset=str(config.dataset_path),
        n_reviews=len(corpus),
        label_counts=label_histogram(corpus),
        test_fraction=config.test_fraction,
        seeds=[int(s) for s in seeds],
        feature_scheme=config.feature_scheme,
        fit_on_all=config.fit_on_all,
        folds=config.folds,
        vocab_sizes=vocab_sizes,
        classifiers=results,
        ranking=ranking,
        recommendation=recommendation,
    )


# --- rendering ---------------------------------------------------------------

def _fmt2(x: float) -> str:
    return f"{x:.2f}"


def render_report(report: BenchmarkReport, fmt: str = "markdown") -> str:
    if fmt == "json":
        return json.dumps(asdict(report), indent=2)
    if fmt != "markdown":
        raise ValueError(f"unknown report format {fmt!r}; expected markdown or json")
    lines = ["# Benchmark report", ""]
    lines.append(f"- environment: {report.environment}")
    lines.append(f"- dataset: {report.dataset} ({report.n_reviews} reviews)")
    counts = ", ".join(f"{name.capitalize()} {report.label_counts[name]}" for name in LABELS)
    lines.append(f"- labels: {counts}")
    mode = (f"{report.folds}-fold cross-validation" if report.folds
            else f"test fraction {report.test_fraction}")
    lines.append(f"- split: {mode}, seeds {report.seeds}")
    lines.append(f"- features: {report.feature_scheme} (fit on "
                 f"{'all documents' if report.fit_on_all else 'training split only'}), "
                 f"vocabulary sizes {report.vocab_sizes}")
    lines.append("")
    lines.append("## Summary")
    lines.append("")
    lines.append("| Classifier | Precision (Avg) | Recall (Avg) | F1-Score (Avg) | Accuracy | Train ms | Predict ms |")
    lines.append("| --- | --- | --- | --- | --- | --- | --- |")
    for kind in report.ranking:
        r = report.classifiers[kind].report
        lines.append("| {} | {} | {} | {} | {} | {:.1f} | {:.1f} |".format(
            kind, _fmt2(r.macro_precision), _fmt2(r.macro_recall),
            _fmt2(r.macro_f1), _fmt2(100.0 * r.accuracy),
            r.cpu_time_train_ms, r.cpu_time_predict_ms))
    lines.append("")
    best = ", ".join(report.recommendation)
    lines.append(f"**Recommendation:** {best} "
                 f"(accuracy {_fmt2(100.0 * report.classifiers[report.recommendation[0]].report.accuracy)})")
    lines.append("")
    for kind in report.ranking:
        result = report.classifiers[kind]
        lines.append(f"## {kind}")
        lines.append("")
        acc = ", ".join(_fmt2(100.0 * a) for a in result.accuracy_per_seed)
        lines.append(f"- accuracy per seed: {acc} (std {result.accuracy_std:.4f})")
        lines.append("")
        lines.append("| Label | Precision | Recall | F1-Score |")
        lines.append("| --- | --- | --- | --- |")
        for name in LABELS:
            s = result.report.per_label[name]
            lines.append(f"| {name.capitalize()} | {_fmt2(s['precision'])} "
                         f"| {_fmt2(s['recall'])} | {_fmt2(s['f1'])} |")
        lines.append("")
    return "\n".join(lines)


def report_from_json(text: str) -> BenchmarkReport:
    """Inverse of render_report(..., 'json')."""
    raw = json.loads(text)
    classifiers_out = {}
    for kind, entry in raw["classifiers"].items():
        classifiers_out[kind] = ClassifierResult(
            report=EvaluationReport(**entry["report"]),
            accuracy_per_seed=entry["accuracy_per_seed"],
            accuracy_std=entry["accuracy_std"],
            confusion_total=entry["confusion_total"],
        )
    raw = dict(raw)
    raw["classifiers"] = classifiers_out
    return BenchmarkReport(**raw)


def zero_timing(obj):
    """Copy of a report dict/list tree with every cpu_time_* value zeroed."""
    if isinstance(obj, dict):
        return {k: (0.0 if k.startswith("cpu_time_") else zero_timing(v))
                for k, v in obj.items()}
    if isinstance(obj, list):
        return [zero_timing(v) for v in obj]
    return obj
