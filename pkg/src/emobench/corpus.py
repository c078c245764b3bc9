"""Corpus loading, label handling, dataset conversion, and splits.

The canonical on-disk format is a two-column CSV with header ``label,text``.
Labels are the five emotions, stored lowercase. Raw third-party exports are
brought into this format by convert_isear().
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from emobench.rng import stream

# canonical label order; every table, vector and tie-break follows it
LABELS: tuple[str, ...] = ("joy", "fear", "sadness", "shame", "guilt")
LABEL_INDEX: dict[str, int] = {name: i for i, name in enumerate(LABELS)}

# labels that appear in raw exports but are out of scope here
_DROPPED_SOURCE_LABELS = frozenset({"anger", "disgust"})
_SOURCE_LABELS = frozenset(LABELS) | _DROPPED_SOURCE_LABELS

_NO_RESPONSE = re.compile(r"^\[?\s*no\s+response\s*\.?\s*\]?$", re.IGNORECASE)


def parse_label(text: str) -> str:
    """Case-insensitive label parse; returns the canonical lowercase form."""
    name = text.strip().lower()
    if name not in LABEL_INDEX:
        raise ValueError(f"unknown label {text!r}; expected one of {', '.join(LABELS)}")
    return name


@dataclass(frozen=True)
class Review:
    id: int
    label: str
    text: str


@dataclass
class Corpus:
    reviews: list[Review]

    def __post_init__(self):
        last = -1
        for r in self.reviews:
            if r.id <= last:
                raise ValueError(f"review ids must be strictly increasing, got {r.id} after {last}")
            last = r.id

    def __len__(self) -> int:
        return len(self.reviews)

    def texts(self) -> list[str]:
        return [r.text for r in self.reviews]

    def label_codes(self) -> np.ndarray:
        return np.asarray([LABEL_INDEX[r.label] for r in self.reviews], dtype=np.int32)


def load_corpus(path: str | Path) -> Corpus:
    """Read a canonical label,text CSV. Fails loudly on any malformed row."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"corpus file not found: {path}")
    reviews = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["label", "text"]:
            raise ValueError(f"{path}: expected header 'label,text', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            label = parse_label(row[0])
            text = row[1].strip()
            if not text:
                raise ValueError(f"{path}:{lineno}: empty review text")
            reviews.append(Review(id=len(reviews), label=label, text=text))
    return Corpus(reviews)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "text"])
        for r in corpus.reviews:
            writer.writerow([r.label, r.text])


def label_histogram(corpus: Corpus) -> dict[str, int]:
    """Review count per label, all five labels present, fixed order."""
    hist = {name: 0 for name in LABELS}
    for r in corpus.reviews:
        hist[r.label] += 1
    return hist


# --- raw export conversion -------------------------------------------------

def _read_raw(path: Path) -> str:
    blob = path.read_bytes()
    try:
        return blob.decode("utf-8")
    except UnicodeDecodeError:
        return blob.decode("latin-1")


def _detect_delimiter(text: str) -> str:
    lines = [ln for ln in text.splitlines() if ln.strip()][:50]
    best, best_cols = None, 1
    for delim in ("|", "\t", ","):
        counts = [len(row) for row in csv.reader(lines, delimiter=delim)]
        if not counts or min(counts) < 2:
            continue
        # consistent column count wins; more columns breaks ties
        if counts.count(counts[0]) >= 0.9 * len(counts) and counts[0] > best_cols:
            best, best_cols = delim, counts[0]
    if best is None:
        raise ValueError("could not detect a delimiter (expected '|', tab, or comma)")
    return best


def _detect_columns(rows: list[list[str]], header: list[str] | None) -> tuple[int, int]:
    """Locate (label_column, text_column) in a raw export."""
    sample = rows[:200]
    n_cols = len(rows[0])
    label_col = -1
    for c in range(n_cols):
        vals = [r[c].strip().lower() for r in sample if len(r) > c]
        hits = sum(v in _SOURCE_LABELS for v in vals)
        if vals and hits >= 0.5 * len(vals):
            label_col = c
            break
    if label_col < 0:
        raise ValueError("no column holding emotion label names found")
    text_col = -1
    if header is not None:
        for c, name in enumerate(header):
            if name.strip().lower() == "sit":
                text_col = c
                break
    if text_col < 0:
        # fall back to the longest column that is not the label column
        lengths = [
            (sum(len(r[c]) for r in sample if len(r) > c), c)
            for c in range(n_cols) if c != label_col
        ]
        text_col = max(lengths)[1]
    return label_col, text_col


def convert_isear(src: str | Path, dst: str | Path) -> int:
    """Convert a raw ISEAR-style export to the canonical label,text CSV.

    Detects the delimiter and the label/text columns, keeps only the five
    in-scope emotions (anger and disgust rows are dropped), skips empty and
    no-response texts, and returns the number of rows written.
    """
    src = Path(src)
    if not src.is_file():
        raise FileNotFoundError(f"raw dataset not found: {src}")
    raw = _read_raw(src)
    delim = _detect_delimiter(raw)
    rows = [r for r in csv.reader(raw.splitlines(), delimiter=delim) if any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{src}: no rows")
    header = None
    first = [c.strip().lower() for c in rows[0]]
    if not any(c in _SOURCE_LABELS for c in first):
        header, rows = rows[0], rows[1:]
    if not rows:
        raise ValueError(f"{src}: no data rows")
    label_col, text_col = _detect_columns(rows, header)
    reviews = []
    for row in rows:
        if len(row) <= max(label_col, text_col):
            continue
        name = row[label_col].strip().lower()
        if name not in LABEL_INDEX:
            continue  # out-of-scope emotion or stray row
        text = row[text_col].strip().strip('"').strip()
        if not text or _NO_RESPONSE.match(text):
            continue
        reviews.append(Review(id=len(reviews), label=name, text=text))
    if not reviews:
        raise ValueError(f"{src}: no in-scope rows (labels {', '.join(LABELS)})")
    write_corpus(Corpus(reviews), dst)
    return len(reviews)


# --- train/test splitting ---------------------------------------------------

@dataclass(frozen=True)
class SplitPlan:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    test_fraction: float

    def __post_init__(self):
        train, test = set(self.train_indices.tolist()), set(self.test_indices.tolist())
        if train & test:
            raise ValueError("train and test indices overlap")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(corpus_size: int, test_fraction: float, seed: int, stratified_labels: np.ndarray | None = None) -> SplitPlan:
    """Sample a train/test split of range(corpus_size).

    Test size is round-half-up(test_fraction * corpus_size), at least 1. The
    draw is uniform without replacement from the stream keyed only by seed.
    With stratified_labels given, the same rounding applies per label instead
    (test size may then differ by a row or two from the unstratified figure).
    """
    if corpus_size < 2:
        raise ValueError(f"need at least 2 reviews to split, got {corpus_size}")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = stream(seed, "split")
    if stratified_labels is None:
        size = max(1, _round_half_up(test_fraction * corpus_size))
        test = np.sort(rng.choice(corpus_size, size=size, replace=False))
    else:
        if len(stratified_labels) != corpus_size:
            raise ValueError("stratified_labels length mismatch")
        parts = []
        for code in range(len(LABELS)):
            ids = np.flatnonzero(stratified_labels == code)
            if len(ids) == 0:
                continue
            size = min(len(ids), max(1, _round_half_up(test_fraction * len(ids))))
            parts.append(ids[rng.choice(len(ids), size=size, replace=False)])
        test = np.sort(np.concatenate(parts))
    mask = np.ones(corpus_size, dtype=bool)
    mask[test] = False
    return SplitPlan(
        train_indices=np.flatnonzero(mask).astype(np.int64),
        test_indices=test.astype(np.int64),
        seed=seed,
        test_fraction=test_fraction,
    )


def kfold_plans(corpus_size: int, k: int, seed: int) -> list[SplitPlan]:
    """k disjoint folds covering the corpus; fold i is the test set of plan i."""
    if not 2 <= k <= corpus_size:
        raise ValueError(f"folds must be in [2, corpus size], got {k}")
    perm = stream(seed, "folds").permutation(corpus_size)
    plans = []
    for fold in np.array_split(perm, k):
        mask = np.ones(corpus_size, dtype=bool)
        mask[fold] = False
        plans.append(SplitPlan(
            train_indices=np.flatnonzero(mask).astype(np.int64),
            test_indices=np.sort(fold).astype(np.int64),
            seed=seed,
            test_fraction=1.0 / k,
        ))
    return plans
