"""End-to-end search: analyze, expand with a strategy, rank."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .activation import (
    ActivationResult,
    ExpandedQuery,
    distance_constrained_spread,
    expand,
    relation_constrained_spread,
)
from .knowledge_base import KnowledgeBase, load_kb_dir
from .query_analysis import QueryAnalysis, QueryAnalyzer
from .retrieval import InvertedIndex, ScoredDoc, rank
from .text import content_words, default_stopwords, normalize_text, read_stopwords

STRATEGIES = ("lexical", "csa", "rcsa")


@dataclass
class Expansion:
    analysis: QueryAnalysis
    activation: ActivationResult | None
    query: ExpandedQuery


class SemanticSearch:
    def __init__(self, kb: KnowledgeBase, analyzer: QueryAnalyzer, index: InvertedIndex | None = None,
                 stopwords=None):
        self.kb = kb
        self.analyzer = analyzer
        self.index = index
        self.stopwords = default_stopwords() if stopwords is None else frozenset(stopwords)

    @classmethod
    def from_dir(cls, kb_dir, phrases=None, class_lexicon=None, stopwords=None, index=None):
        d = Path(kb_dir)
        kb = load_kb_dir(d)
        analyzer = QueryAnalyzer.from_files(kb, phrases or d / "phrases.tsv", class_lexicon or d / "class_lexicon.tsv")
        stop = read_stopwords(stopwords) if stopwords else None
        return cls(kb, analyzer, index, stop)

    def expand(self, text: str, strategy: str = "rcsa", max_added: int | None = None) -> Expansion:
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
        analysis = self.analyzer.analyze(text)
        original = content_words(text, self.stopwords)
        if strategy == "lexical":
            activation = None
        elif strategy == "csa":
            activation = distance_constrained_spread(self.kb, analysis.seeds)
        else:
            activation = relation_constrained_spread(self.kb, analysis.patterns)
        expanded = expand(original, activation or (), self.kb, self.stopwords, max_added)
        return Expansion(analysis, activation, expanded)

    def search(self, text: str, strategy: str = "rcsa", k: int = 1000,
               max_added: int | None = None) -> list[ScoredDoc]:
        if self.index is None:
            raise ValueError("no index loaded")
        exp = self.expand(text, strategy, max_added)
        terms = normalize_text(" ".join(dict.fromkeys(exp.query.terms)), self.stopwords)
        return rank(self.index, list(dict.fromkeys(terms)), k)
