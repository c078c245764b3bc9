"""Tokenization, punctuation stripping, and stop word removal.

Per-review pipeline: lowercase whitespace tokenization, then iterative
leading/trailing punctuation stripping (interior punctuation survives, so
"it's" keeps its apostrophe), drop tokens that stripped to nothing, then stop
word removal. A review may end up with zero tokens; it is kept anyway so
token lists stay index-aligned with the corpus.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from emobench.corpus import Corpus


def tokenize(text: str) -> list[str]:
    """Split on any whitespace run and lowercase. No other normalization."""
    return text.lower().split()


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def strip_punctuation(token: str) -> str:
    """Strip Unicode punctuation from both ends, repeatedly, until none is left.

    May return the empty string when the token was punctuation only.
    """
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


@dataclass(frozen=True)
class StopWordList:
    words: frozenset[str]

    def __post_init__(self):
        if not self.words:
            raise ValueError("stop word list is empty")
        for w in self.words:
            if w != w.lower():
                raise ValueError(f"stop word not lowercase: {w!r}")
            if any(_is_punct(ch) for ch in w):
                raise ValueError(f"stop word contains punctuation: {w!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "StopWordList":
        """Load one word per line; blank lines and #-comments are skipped."""
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"stop word file not found: {path}")
        words = set()
        for line in path.read_text(encoding="utf-8").splitlines():
            word = line.strip()
            if word and not word.startswith("#"):
                words.add(word)
        return cls(frozenset(words))

    @classmethod
    def default(cls) -> "StopWordList":
        text = resources.files("emobench.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
        words = {w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#")}
        return cls(frozenset(words))


def remove_stop_words(tokens: list[str], stop_words: StopWordList) -> list[str]:
    return [t for t in tokens if t not in stop_words.words]


@dataclass(frozen=True)
class TokenizedReview:
    id: int
    label: str
    tokens: tuple[str, ...]


def preprocess_review(text: str, stop_words: StopWordList) -> list[str]:
    tokens = [strip_punctuation(t) for t in tokenize(text)]
    return remove_stop_words([t for t in tokens if t], stop_words)


def preprocess_corpus(corpus: Corpus, stop_words: StopWordList) -> list[TokenizedReview]:
    """Tokenize every review. Output is index-aligned with the corpus; reviews
    whose every token was stripped or stopped keep an empty token tuple."""
    return [
        TokenizedReview(id=r.id, label=r.label, tokens=tuple(preprocess_review(r.text, stop_words)))
        for r in corpus.reviews
    ]
