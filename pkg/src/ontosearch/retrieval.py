"""Keyword vector-space retrieval with tf.idf weights and cosine ranking."""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

from .text import normalize_text

INDEX_FORMAT = "ontosearch-index"
INDEX_VERSION = 1
TIE_DECIMALS = 12  # scores equal to this many decimals are ties, broken by doc id


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class Document:
    id: str
    text: str


class ScoredDoc(NamedTuple):
    doc_id: str
    score: float


def tf_idf_weight(tf: int, df: int, n_docs: int) -> float:
    """Raw tf times natural-log idf; zero when tf, df or the idf vanish."""
    assert 0 <= df <= n_docs, f"df={df} outside [0, N={n_docs}]"
    if tf <= 0 or df <= 0 or df == n_docs:
        return 0.0
    return tf * math.log(n_docs / df)


@dataclass(frozen=True, eq=False)
class InvertedIndex:
    doc_ids: tuple[str, ...]
    postings: dict[str, tuple[tuple[str, int], ...]]
    doc_norms: dict[str, float]

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    N = n_docs

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    @property
    def vocabulary(self) -> list[str]:
        return sorted(self.postings)

    def weight(self, tf: int, term: str) -> float:
        return tf_idf_weight(tf, self.df(term), self.n_docs)

    def to_json(self) -> str:
        payload = {
            "format": INDEX_FORMAT,
            "version": INDEX_VERSION,
            "doc_ids": list(self.doc_ids),
            "postings": {t: [list(p) for p in ps] for t, ps in sorted(self.postings.items())},
            "doc_norms": dict(sorted(self.doc_norms.items())),
        }
        return json.dumps(payload, ensure_ascii=False, separators=(",", ":"), sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: str) -> "InvertedIndex":
        try:
            payload = json.loads(data)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"index is not valid JSON: {exc}") from None
        if not isinstance(payload, dict) or payload.get("format") != INDEX_FORMAT:
            raise CorpusError("not an ontosearch index file")
        if payload.get("version") != INDEX_VERSION:
            raise CorpusError(f"unsupported index version {payload.get('version')!r}")
        try:
            return cls(
                doc_ids=tuple(payload["doc_ids"]),
                postings={t: tuple((d, int(tf)) for d, tf in ps) for t, ps in payload["postings"].items()},
                doc_norms={d: float(v) for d, v in payload["doc_norms"].items()},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"corrupt index: {exc}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"cannot read index {path}: {exc}") from None
        return cls.from_json(text)


def build_index(corpus: Iterable[Document], stopwords=None) -> InvertedIndex:
    """Index documents; the result does not depend on their order."""
    docs = sorted(corpus, key=lambda d: d.id)
    for a, b in zip(docs, docs[1:]):
        if a.id == b.id:
            raise CorpusError(f"duplicate document id {a.id!r}")
    counts = {d.id: Counter(normalize_text(d.text, stopwords)) for d in docs}
    postings = defaultdict(list)
    for doc_id in counts:
        for term, tf in counts[doc_id].items():
            postings[term].append((doc_id, tf))
    n = len(docs)
    frozen = {t: tuple(ps) for t, ps in postings.items()}
    norms = {}
    for doc_id, c in counts.items():
        sq = sum(tf_idf_weight(tf, len(frozen[t]), n) ** 2 for t, tf in sorted(c.items()))
        norms[doc_id] = math.sqrt(sq)
    return InvertedIndex(tuple(d.id for d in docs), frozen, norms)


def rank(index: InvertedIndex, query_terms: Iterable[str], k: int = 1000) -> list[ScoredDoc]:
    """Cosine ranking of documents for already-normalized query terms.

    Query tf counts repetitions in ``query_terms``. Documents scoring zero
    are left out.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    q = Counter(query_terms)
    qw = {t: index.weight(tf, t) for t, tf in sorted(q.items()) if t in index.postings}
    qw = {t: w for t, w in qw.items() if w > 0}
    if not qw:
        return []
    qnorm = math.sqrt(sum(w * w for w in qw.values()))
    dots: dict[str, float] = defaultdict(float)
    for t, w in qw.items():
        df = len(index.postings[t])
        for doc_id, tf in index.postings[t]:
            dots[doc_id] += w * tf_idf_weight(tf, df, index.n_docs)
    scored = [ScoredDoc(d, dot / (qnorm * index.doc_norms[d])) for d, dot in dots.items() if dot > 0]
    scored.sort(key=lambda s: (-round(s.score, TIE_DECIMALS), s.doc_id))
    return scored[:k]


def read_corpus(path: str | Path) -> list[Document]:
    """Read a JSON-lines corpus: one ``{"id": ..., "text": ...}`` per line."""
    docs = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                docs.append(Document(str(obj["id"]), str(obj["text"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad corpus record ({exc})") from None
    return docs
