"""Tokenization, stopwords and stemming shared by query analysis and retrieval."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

from nltk.stem.porter import PorterStemmer

_WORD = re.compile(r"[^\W_]+")

_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


class Token(NamedTuple):
    text: str
    start: int  # character offsets into the source string
    end: int


def tokenize(text: str) -> list[Token]:
    """Split on anything that is not a letter or digit; case is preserved."""
    return [Token(m.group(), m.start(), m.end()) for m in _WORD.finditer(text)]


def words(text: str) -> list[str]:
    return [t.text.lower() for t in tokenize(text)]


def normalize_surface(surface: str) -> str:
    """Lowercase and collapse runs of whitespace. Diacritics are kept."""
    return " ".join(surface.lower().split())


def read_stopwords(path: str | Path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    ref = resources.files("ontosearch") / "data" / "fixture" / "stopwords.txt"
    with resources.as_file(ref) as path:
        return read_stopwords(path)


@lru_cache(maxsize=65536)
def stem(word: str) -> str:
    return _stemmer.stem(word, to_lowercase=False)


def content_words(text: str, stopwords: Iterable[str] | None = None) -> list[str]:
    """Lowercased, stopword-filtered tokens without stemming."""
    stop = default_stopwords() if stopwords is None else stopwords
    return [w for w in words(text) if w not in stop]


def normalize_text(text: str, stopwords: Iterable[str] | None = None) -> list[str]:
    """Full indexing pipeline: lowercase, split, drop stopwords, Porter-stem.

    >>> normalize_text("Where is the actress, Marion Davies, buried?")
    ['actress', 'marion', 'davi', 'buri']
    """
    return [stem(w) for w in content_words(text, stopwords)]
