"""Bag-of-words features: vocabulary, counts, TF, and TF-IDF.

The vocabulary is fit on training documents only (the harness offers an
explicit compatibility switch to fit on everything). Out-of-vocabulary
tokens are dropped at transform time; a document with no in-vocabulary
tokens becomes an all-zero row, never an error.

idf uses the natural log throughout: idf(t) = ln(n_docs / df(t)). It is
computed with math.log per term rather than a vectorized log so that a
plain-Python recomputation reproduces every stored value bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from emobench.sparse import CsrMatrix, SparseRow

SCHEMES = ("count", "tf", "tfidf")

CountVector = dict[int, int]


@dataclass(frozen=True)
class Vocabulary:
    """Term -> column index, indexed in order of first occurrence."""

    terms: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.terms)


def build_vocabulary(docs: Iterable[Sequence[str]]) -> Vocabulary:
    terms: dict[str, int] = {}
    for doc in docs:
        for token in doc:
            if token not in terms:
                terms[token] = len(terms)
    if not terms:
        raise ValueError("cannot build a vocabulary: all documents are empty")
    return Vocabulary(terms)


def count_vector(doc: Sequence[str], vocab: Vocabulary) -> CountVector:
    """Occurrence counts of in-vocabulary tokens; unknown tokens are dropped."""
    counts: CountVector = {}
    for token in doc:
        idx = vocab.terms.get(token)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    return counts


def term_frequency(counts: CountVector) -> dict[int, float]:
    """Counts normalized by the document's in-vocabulary token total."""
    total = sum(counts.values())
    if total == 0:
        return {}
    return {idx: c / total for idx, c in counts.items()}


@dataclass(frozen=True)
class TfIdfModel:
    idf: np.ndarray  # one weight per vocabulary column
    n_docs: int


def fit_idf(count_rows: Sequence[CountVector], vocab: Vocabulary) -> TfIdfModel:
    """idf(t) = ln(n_docs / df(t)) over the given training count vectors."""
    n_docs = len(count_rows)
    if n_docs == 0:
        raise ValueError("cannot fit idf on zero documents")
    df = [0] * vocab.size
    for row in count_rows:
        for idx in row:
            df[idx] += 1
    for idx, d in enumerate(df):
        if d == 0:
            raise ValueError(f"vocabulary term {idx} absent from the fit documents")
    idf = np.asarray([math.log(n_docs / d) for d in df], dtype=np.float64)
    return TfIdfModel(idf=idf, n_docs=n_docs)


@dataclass
class FeatureMatrix:
    matrix: CsrMatrix
    scheme: str

    @property
    def n_rows(self) -> int:
        return self.matrix.n_rows

    @property
    def n_cols(self) -> int:
        return self.matrix.n_cols

    def row(self, i: int) -> SparseRow:
        return self.matrix.row(i)


def transform(
    docs: Sequence[Sequence[str]],
    vocab: Vocabulary,
    scheme: str,
    tfidf_model: TfIdfModel | None = None,
) -> FeatureMatrix:
    """Encode token documents as one sparse row each, in order.

    Empty documents (or documents that are fully out-of-vocabulary) produce
    all-zero rows. tfidf entries whose idf weight is 0 are dropped, keeping
    stored values nonzero.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if scheme == "tfidf" and tfidf_model is None:
        raise ValueError("scheme 'tfidf' needs a fitted TfIdfModel")
    rows: list[dict[int, float]] = []
    for doc in docs:
        counts = count_vector(doc, vocab)
        if scheme == "count":
            rows.append({i: float(c) for i, c in counts.items()})
        elif scheme == "tf":
            rows.append(term_frequency(counts))
        else:
            idf = tfidf_model.idf
            rows.append({i: tf * idf[i] for i, tf in term_frequency(counts).items()})
    return FeatureMatrix(matrix=CsrMatrix.from_dicts(rows, vocab.size), scheme=scheme)


def dump_features(features: FeatureMatrix, ids: Sequence[int], path: str | Path) -> None:
    """Write one JSON object per row: {"id", "scheme", "indices", "values"}."""
    if len(ids) != features.n_rows:
        raise ValueError("ids length does not match the number of rows")
    with Path(path).open("w", encoding="utf-8") as fh:
        for i, rid in enumerate(ids):
            row = features.row(i)
            fh.write(json.dumps({
                "id": int(rid),
                "scheme": features.scheme,
                "indices": [int(j) for j in row.indices],
                "values": [float(v) for v in row.values],
            }) + "\n")
