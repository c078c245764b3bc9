"""Synthetic corpora with known structure, for tests and self-checks."""

from __future__ import annotations

from emobench.corpus import LABELS, Corpus, Review
from emobench.rng import stream

# sprinkled into documents to give preprocessing something to remove
_FILLER = ("the", "was", "a", "this")


def _doc(rng, words: list[str], lo: int, hi: int) -> str:
    length = int(rng.integers(lo, hi + 1))
    tokens = [words[int(rng.integers(0, len(words)))] for _ in range(length)]
    if rng.random() < 0.5:
        tokens.insert(int(rng.integers(0, len(tokens) + 1)),
                      _FILLER[int(rng.integers(0, len(_FILLER)))])
    return " ".join(tokens)


def separable_corpus(train_per_label: int, test_per_label: int, seed: int = 7,
                     words_per_label: int = 30, doc_len: tuple[int, int] = (5, 12),
                     ) -> tuple[Corpus, Corpus]:
    """(train, test) corpora whose labels use disjoint vocabularies.

    Every document draws only from its own label's words (plus the odd stop
    word), so any sound classifier should reach near-perfect test accuracy.
    """
    rng = stream(seed, "synthetic")
    vocab = {name: [f"{name}w{j:02d}" for j in range(words_per_label)] for name in LABELS}
    lo, hi = doc_len
    train_reviews, test_reviews = [], []
    for name in LABELS:
        for _ in range(train_per_label):
            train_reviews.append(Review(id=len(train_reviews), label=name,
                                        text=_doc(rng, vocab[name], lo, hi)))
        for _ in range(test_per_label):
            test_reviews.append(Review(id=len(test_reviews), label=name,
                                       text=_doc(rng, vocab[name], lo, hi)))
    return Corpus(train_reviews), Corpus(test_reviews)


def mixed_corpus(n_per_label: int, seed: int = 11) -> Corpus:
    """One corpus, labels interleaved; for split and end-to-end CLI tests."""
    train, test = separable_corpus(n_per_label, 0, seed=seed)
    by_label = {name: [r for r in train.reviews if r.label == name] for name in LABELS}
    reviews = []
    for i in range(n_per_label):
        for name in LABELS:
            reviews.append(Review(id=len(reviews), label=name, text=by_label[name][i].text))
    return Corpus(reviews)
