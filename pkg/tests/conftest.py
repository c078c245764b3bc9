import numpy as np
import pytest

from emobench.corpus import LABELS
from emobench.features import build_vocabulary, count_vector, fit_idf, transform
from emobench.preprocess import StopWordList, preprocess_corpus
from emobench.synthetic import separable_corpus


@pytest.fixture(scope="session")
def sep_data():
    """Small separable corpus featurized once; shared by the classifier tests."""
    train, test = separable_corpus(30, 10, seed=7)
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
        "vocab": vocab,
    }
