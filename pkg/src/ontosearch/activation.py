"""Spreading activation over the fact graph and query expansion.

Three strategies, from least to most constrained:

* ``free``          breadth-first over every relation, both directions, up to a depth
* ``distance-csa``  the same with depth 1
* ``r-csa``         one hop along the relation named in the query, keeping only
                    entities whose class falls under the query's target class
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal

from .knowledge_base import Fact, KnowledgeBase, UnknownReferenceError
from .query_analysis import RelationPattern
from .text import content_words

Strategy = Literal["free", "distance-csa", "r-csa"]


@dataclass(frozen=True)
class TraceEntry:
    entity: str
    strategy: Strategy
    source: str  # seed or anchor entity
    relation: str | None = None
    direction: str | None = None  # role of the activated entity in the fact
    fact: Fact | None = None

    def to_line(self) -> str:
        return "\t".join([self.entity, self.strategy, self.source, self.relation or "-", self.direction or "-"])


@dataclass
class ActivationResult:
    activated: set[str]
    strategy: Strategy
    trace: list[TraceEntry] = field(default_factory=list)

    def explain(self) -> str:
        return "\n".join(t.to_line() for t in sorted(self.trace, key=lambda t: (t.entity, t.source)))


def _check_seeds(kb: KnowledgeBase, seeds: Iterable[str]) -> set[str]:
    seeds = set(seeds)
    for s in seeds:
        if s not in kb.entities:
            raise UnknownReferenceError(f"unknown seed entity {s!r}")
    return seeds


def _link(kb: KnowledgeBase, a: str, b: str) -> tuple[Fact, str]:
    """First fact joining ``a`` and ``b`` and the role ``b`` plays in it."""
    for f in sorted(kb.facts_touching(a)):
        if f.object == b:
            return f, "object"
        if f.subject == b:
            return f, "subject"
    raise AssertionError(f"no fact links {a} and {b}")


def free_spread(kb: KnowledgeBase, seeds: Iterable[str], depth: int, *, strategy: Strategy = "free") -> ActivationResult:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    seeds = _check_seeds(kb, seeds)
    adj = kb.adjacency()
    result = ActivationResult(set(), strategy)
    visited = set(seeds)
    frontier = sorted(seeds)
    for _ in range(depth):
        nxt = []
        for node in frontier:
            for other in sorted(adj.get(node, ())):
                if other in visited:
                    continue
                visited.add(other)
                nxt.append(other)
                fact, role = _link(kb, node, other)
                result.trace.append(TraceEntry(other, strategy, node, fact.relation, role, fact))
        result.activated.update(nxt)
        frontier = nxt
        if not frontier:
            break
    return result


def distance_constrained_spread(kb: KnowledgeBase, seeds: Iterable[str]) -> ActivationResult:
    """Every direct neighbour of the seeds; no relation or class filter."""
    return free_spread(kb, seeds, 1, strategy="distance-csa")


def relation_constrained_spread(kb: KnowledgeBase, patterns: Iterable[RelationPattern]) -> ActivationResult:
    """One hop along each pattern's relation, filtered by its target class."""
    result = ActivationResult(set(), "r-csa")
    patterns = list(patterns)
    anchors = {p.anchor for p in patterns}
    for p in patterns:
        far_role = "object" if p.anchor_role == "subject" else "subject"
        for x in sorted(kb.neighbors(p.anchor, p.relation, p.anchor_role)):
            if x in anchors or not kb.is_subclass(kb.class_of(x), p.target_class):
                continue
            fact = Fact(p.anchor, p.relation, x) if p.anchor_role == "subject" else Fact(x, p.relation, p.anchor)
            result.activated.add(x)
            result.trace.append(TraceEntry(x, "r-csa", p.anchor, p.relation, far_role, fact))
    return result


@dataclass(frozen=True)
class ExpandedQuery:
    original_terms: tuple[str, ...]
    added_terms: tuple[str, ...]

    @property
    def terms(self) -> tuple[str, ...]:
        return self.original_terms + self.added_terms

    def as_set(self) -> frozenset[str]:
        return frozenset(self.terms)

    def __str__(self):
        return " OR ".join(dict.fromkeys(self.terms))


def expand(original_terms: Iterable[str], activation: ActivationResult | Iterable[str], kb: KnowledgeBase,
           stopwords=None, max_added: int | None = None) -> ExpandedQuery:
    """Append the primary-name words of each activated entity.

    Entities are taken in id order; words already present are skipped.
    ``max_added`` caps the number of entities contributing (None = all).
    """
    original = tuple(original_terms)
    ids = activation.activated if isinstance(activation, ActivationResult) else set(activation)
    chosen = sorted(ids)
    if max_added is not None:
        chosen = chosen[:max_added]
    seen = set(original)
    added = []
    for eid in chosen:
        for w in content_words(kb.entities[eid].primary_name, stopwords):
            if w not in seen:
                seen.add(w)
                added.append(w)
    return ExpandedQuery(original, tuple(added))
