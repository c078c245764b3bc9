"""Command line interface.

    bench run --data reviews.csv [--seeds 1,2,3] [--format json] ...
    bench convert-isear raw_export.csv reviews.csv
    bench verify [--data reviews.csv]
    bench backend-bench [--repeat N]

`run` options may also come from a config file of `key = value` lines
(--config); explicit command line flags win over the file. Dotted keys such
as `knn.k = 25` override a single classifier parameter, as does
`--set knn.k=25`.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from emobench import classifiers, harness
from emobench.corpus import convert_isear, kfold_plans, load_corpus, split
from emobench.features import dump_features
from emobench.preprocess import StopWordList, preprocess_corpus

_RUN_KEYS = {
    "data", "test_fraction", "seed", "seeds", "classifiers", "format",
    "fit_on_all", "folds", "scheme", "stratified", "stop_words", "out",
    "dump_features",
}


def _parse_value(text: str):
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text.strip()


def read_config_file(path: str | Path) -> tuple[dict, dict]:
    """Parse `key = value` lines into (run options, per-classifier overrides)."""
    options: dict = {}
    overrides: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if "." in key:
            kind, _, param = key.partition(".")
            if kind not in classifiers.KINDS:
                raise ValueError(f"{path}:{lineno}: unknown classifier {kind!r}")
            overrides.setdefault(kind, {})[param] = _parse_value(value)
        elif key in _RUN_KEYS:
            options[key] = _parse_value(value)
        else:
            raise ValueError(f"{path}:{lineno}: unknown option {key!r}")
    return options, overrides


def _parse_seeds(value) -> tuple[int, ...]:
    if isinstance(value, int):
        return (value,)
    parts = [p.strip() for p in str(value).split(",") if p.strip()]
    if not parts:
        raise ValueError("empty seed list")
    return tuple(int(p) for p in parts)


def _parse_kinds(value) -> tuple[str, ...]:
    parts = [p.strip() for p in str(value).split(",") if p.strip()]
    if not parts:
        raise ValueError("empty classifier list")
    return tuple(parts)


def _parse_set_flags(entries: list[str]) -> dict:
    overrides: dict = {}
    for entry in entries:
        if "=" not in entry or "." not in entry.split("=", 1)[0]:
            raise ValueError(f"--set expects kind.param=value, got {entry!r}")
        key, _, value = entry.partition("=")
        kind, _, param = key.strip().partition(".")
        overrides.setdefault(kind, {})[param] = _parse_value(value)
    return overrides


def _merge_overrides(base: dict, extra: dict) -> dict:
    merged = {kind: dict(params) for kind, params in base.items()}
    for kind, params in extra.items():
        merged.setdefault(kind, {}).update(params)
    return merged


def _build_run_config(args) -> tuple[harness.ExperimentConfig, dict]:
    file_opts: dict = {}
    file_overrides: dict = {}
    if args.config:
        file_opts, file_overrides = read_config_file(args.config)

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        if key in file_opts:
            return file_opts[key]
        return default

    data = pick(args.data, "data", None)
    if data is None:
        raise ValueError("no dataset: pass --data or put `data = path` in the config file")
    seeds_raw = pick(args.seeds, "seeds", None)
    config = harness.ExperimentConfig(
        dataset_path=str(data),
        test_fraction=float(pick(args.test_fraction, "test_fraction", 0.2)),
        seed=int(pick(args.seed, "seed", 42)),
        seeds=_parse_seeds(seeds_raw) if seeds_raw is not None else None,
        feature_scheme=str(pick(args.scheme, "scheme", "tfidf")),
        fit_on_all=bool(pick(args.fit_on_all, "fit_on_all", False)),
        stratified=bool(pick(args.stratified, "stratified", False)),
        folds=pick(args.folds, "folds", None),
        classifiers=_parse_kinds(pick(args.classifiers, "classifiers", ",".join(classifiers.KINDS))),
        stop_words_path=pick(args.stop_words, "stop_words", None),
        overrides=_merge_overrides(file_overrides, _parse_set_flags(args.set or [])),
    )
    if config.folds is not None:
        config.folds = int(config.folds)
    run_opts = {
        "format": pick(args.format, "format", "markdown"),
        "out": pick(args.out, "out", None),
        "dump_features": pick(args.dump_features, "dump_features", None),
    }
    if run_opts["format"] not in ("markdown", "json"):
        raise ValueError(f"unknown format {run_opts['format']!r}")
    return config, run_opts


def _dump_split_features(config: harness.ExperimentConfig, prefix: str) -> None:
    # reproduce the first split of the first seed and write its matrices
    corpus = load_corpus(config.dataset_path)
    stop = (StopWordList.from_file(config.stop_words_path)
            if config.stop_words_path else StopWordList.default())
    tokenized = preprocess_corpus(corpus, stop)
    seed = config.effective_seeds()[0]
    if config.folds:
        plan = kfold_plans(len(corpus.reviews), config.folds, seed)[0]
    else:
        strat = corpus.label_codes() if config.stratified else None
        plan = split(len(corpus.reviews), config.test_fraction, seed, strat)
    prepared = harness.prepare_features(tokenized, plan, config.feature_scheme,
                                        config.fit_on_all)
    ids = [corpus.reviews[i].id for i in plan.train_indices]
    dump_features(prepared.train_x, ids, f"{prefix}.train.jsonl")
    ids = [corpus.reviews[i].id for i in plan.test_indices]
    dump_features(prepared.test_x, ids, f"{prefix}.test.jsonl")


def cmd_run(args) -> int:
    config, run_opts = _build_run_config(args)
    report = harness.run_experiment(config)
    text = harness.render_report(report, run_opts["format"])
    if run_opts["out"]:
        Path(run_opts["out"]).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {run_opts['format']} report to {run_opts['out']}")
    else:
        print(text)
    if run_opts["dump_features"]:
        _dump_split_features(config, run_opts["dump_features"])
        print(f"wrote feature rows to {run_opts['dump_features']}.train.jsonl "
              f"and .test.jsonl")
    return 0


def cmd_convert_isear(args) -> int:
    n = convert_isear(args.src, args.dst)
    print(f"converted {n} reviews -> {args.dst}")
    return 0


def cmd_verify(args) -> int:
    from emobench import verify

    results = verify.run_all(args.data)
    failed = 0
    for res in results:
        tag = res.status.upper()
        print(f"{tag:4s} {res.name}: {res.detail}")
        failed += res.status == "fail"
    print(f"{len(results)} checks: "
          f"{sum(r.status == 'pass' for r in results)} passed, "
          f"{sum(r.status == 'skip' for r in results)} skipped, "
          f"{failed} failed")
    return 1 if failed else 0


def cmd_backend_bench(args) -> int:
    from emobench import backendbench

    print(backendbench.render(backendbench.run_backend_benchmark(repeat=args.repeat)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench", description="emotion classification benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train and evaluate classifiers on a corpus")
    run.add_argument("--data", help="canonical label,text CSV")
    run.add_argument("--config", help="key = value options file")
    run.add_argument("--seed", type=int, help="split/init seed (default 42)")
    run.add_argument("--seeds", help="comma list of seeds to average over")
    run.add_argument("--classifiers", help="comma list of classifier kinds")
    run.add_argument("--format", choices=("markdown", "json"), default=None)
    run.add_argument("--fit-on-all", action="store_true", default=None,
                     help="fit vocabulary and idf on the whole corpus "
                          "instead of the training rows only")
    run.add_argument("--folds", type=int, help="k-fold cross validation instead of one split")
    run.add_argument("--test-fraction", type=float, help="held-out fraction (default 0.2)")
    run.add_argument("--scheme", choices=("count", "tf", "tfidf"), default=None)
    run.add_argument("--stratified", action="store_true", default=None,
                     help="per-label proportional test sampling")
    run.add_argument("--stop-words", help="custom stop word file")
    run.add_argument("--set", action="append", metavar="KIND.PARAM=VALUE",
                     help="override one classifier parameter (repeatable)")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.add_argument("--dump-features", metavar="PREFIX",
                     help="also write PREFIX.train.jsonl / PREFIX.test.jsonl "
                          "feature rows for the first split")
    run.set_defaults(func=cmd_run)

    conv = sub.add_parser("convert-isear", help="convert a raw survey export "
                          "to the canonical label,text CSV")
    conv.add_argument("src")
    conv.add_argument("dst")
    conv.set_defaults(func=cmd_convert_isear)

    ver = sub.add_parser("verify", help="run the self-verification checks")
    ver.add_argument("--data", help="canonical CSV for the reference-accuracy checks")
    ver.set_defaults(func=cmd_verify)

    back = sub.add_parser("backend-bench",
                          help="compare the compiled and pure-python kernel backends")
    back.add_argument("--repeat", type=int, default=1, help="timing repetitions")
    back.set_defaults(func=cmd_backend_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
