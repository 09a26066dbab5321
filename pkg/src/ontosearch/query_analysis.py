"""Rule-driven query analysis: relation, entity and class mentions -> I-R-C patterns."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

from .knowledge_base import KnowledgeBase, Role, read_rows
from .text import Token, tokenize

GAP = "…"
PHRASE_WINDOW = 8


@dataclass(frozen=True)
class Span:
    """Token positions covered by a mention (gapped phrases leave holes)."""

    positions: tuple[int, ...]

    @property
    def start(self) -> int:
        return self.positions[0]

    @property
    def end(self) -> int:
        return self.positions[-1] + 1

    def overlaps(self, other: "Span") -> bool:
        return bool(set(self.positions) & set(other.positions))

    def distance(self, other: "Span") -> int:
        return min(abs(i - j) for i in self.positions for j in other.positions)

    @classmethod
    def range(cls, start: int, end: int) -> "Span":
        return cls(tuple(range(start, end)))


@dataclass(frozen=True)
class RelationPhraseEntry:
    groups: tuple[tuple[str, ...], ...]
    relation: str
    unknown_side: Role

    @property
    def phrase(self) -> str:
        return f" {GAP} ".join(" ".join(g) for g in self.groups)

    def __len__(self):
        return sum(len(g) for g in self.groups)


@dataclass(frozen=True)
class RelationMention:
    span: Span
    entry: RelationPhraseEntry


@dataclass(frozen=True)
class EntityMention:
    span: Span
    surface: str
    entity: str


@dataclass(frozen=True)
class ClassMention:
    span: Span
    class_id: str
    source: Literal["wh-word", "class-noun"]


@dataclass(frozen=True)
class ClassRule:
    tokens: tuple[str, ...]
    class_id: str
    kind: Literal["wh", "noun"]


@dataclass(frozen=True)
class RelationPattern:
    anchor: str
    relation: str
    target_class: str
    anchor_role: Role

    def __str__(self):
        left = f"[I: {self.anchor}]" if self.anchor_role == "subject" else f"[C: {self.target_class}]"
        right = f"[C: {self.target_class}]" if self.anchor_role == "subject" else f"[I: {self.anchor}]"
        return f"{left}-(R: {self.relation})-{right}"


@dataclass
class QueryAnalysis:
    text: str
    tokens: list[Token]
    relation_mentions: list[RelationMention]
    entity_mentions: list[EntityMention]
    class_mentions: list[ClassMention]
    patterns: list[RelationPattern]
    trace: list[str] = field(default_factory=list)

    @property
    def seeds(self) -> set[str]:
        return {m.entity for m in self.entity_mentions}


# -- lexicons -----------------------------------------------------------------


def parse_phrase(text: str) -> tuple[tuple[str, ...], ...]:
    groups = []
    for chunk in text.replace("...", GAP).split(GAP):
        toks = tuple(chunk.lower().split())
        if toks:
            groups.append(toks)
    return tuple(groups)


def load_phrase_dictionary(path: str | Path, kb: KnowledgeBase | None = None) -> list[RelationPhraseEntry]:
    entries = []
    for lineno, (phrase, relation, side) in read_rows(path, 3, 3):
        groups = parse_phrase(phrase)
        if not groups or side not in ("subject", "object"):
            raise ValueError(f"{path}:{lineno}: malformed phrase entry")
        if kb is not None and relation not in kb.relations:
            raise ValueError(f"{path}:{lineno}: unknown relation {relation!r}")
        entries.append(RelationPhraseEntry(groups, relation, side))
    return entries


def load_class_lexicon(path: str | Path, kb: KnowledgeBase | None = None) -> list[ClassRule]:
    rules = []
    for lineno, (surface, class_id, kind) in read_rows(path, 3, 3):
        toks = tuple(surface.lower().split())
        if not toks or kind not in ("wh", "noun"):
            raise ValueError(f"{path}:{lineno}: malformed class rule")
        if kb is not None and class_id not in kb.classes:
            raise ValueError(f"{path}:{lineno}: unknown class {class_id!r}")
        rules.append(ClassRule(toks, class_id, kind))
    return rules


# -- mention detection ----------------------------------------------------------


def _lower(tokens: Iterable[Token | str]) -> list[str]:
    return [(t.text if isinstance(t, Token) else t).lower() for t in tokens]


def _find_runs(words: list[str], group: tuple[str, ...], start: int) -> Iterable[int]:
    n = len(group)
    for i in range(start, len(words) - n + 1):
        if tuple(words[i:i + n]) == group:
            yield i


def _match_phrase(words, entry: RelationPhraseEntry, window: int):
    first, rest = entry.groups[0], entry.groups[1:]
    for i in _find_runs(words, first, 0):
        positions = list(range(i, i + len(first)))
        cursor = i + len(first)
        for group in rest:
            j = next(_find_runs(words, group, cursor), None)
            if j is None:
                break
            positions.extend(range(j, j + len(group)))
            cursor = j + len(group)
        else:
            if positions[-1] - positions[0] < window:
                yield Span(tuple(positions))


def detect_relation_mentions(tokens, phrase_dictionary, window: int = PHRASE_WINDOW) -> list[RelationMention]:
    """Find dictionary phrases in the query.

    Token groups of one phrase must appear in order within ``window``
    tokens. When matches share token positions the phrase with more tokens
    wins (then the tighter span, then the leftmost).
    """
    words = _lower(tokens)
    candidates = [
        RelationMention(span, entry)
        for entry in phrase_dictionary
        for span in _match_phrase(words, entry, window)
    ]
    candidates.sort(key=lambda m: (-len(m.entry), m.span.end - m.span.start, m.span.start, m.entry.relation))
    chosen: list[RelationMention] = []
    for m in candidates:
        if not any(m.span.overlaps(c.span) for c in chosen):
            chosen.append(m)
    chosen.sort(key=lambda m: (m.span.start, m.entry.relation))
    return chosen


def detect_entity_mentions(tokens: list[Token], kb: KnowledgeBase) -> list[EntityMention]:
    """Greedy left-to-right longest alias match.

    An alias shared by several entities yields one mention per entity on the
    same span.
    """
    words = _lower(tokens)
    longest = kb.max_alias_tokens
    mentions = []
    i = 0
    while i < len(words):
        for n in range(min(longest, len(words) - i), 0, -1):
            ids = kb.alias_token_index.get(tuple(words[i:i + n]))
            if ids:
                span = Span.range(i, i + n)
                surface = _surface(tokens, span)
                mentions.extend(EntityMention(span, surface, e) for e in sorted(ids))
                i += n
                break
        else:
            i += 1
    return mentions


def _surface(tokens, span: Span) -> str:
    if tokens and isinstance(tokens[0], Token):
        return " ".join(tokens[p].text for p in span.positions)
    return " ".join(tokens[p] for p in span.positions)


def detect_class_mentions(tokens, class_lexicon: Iterable[ClassRule]) -> list[ClassMention]:
    words = _lower(tokens)
    found = set()
    for rule in class_lexicon:
        source = "wh-word" if rule.kind == "wh" else "class-noun"
        for i in _find_runs(words, rule.tokens, 0):
            found.add(ClassMention(Span.range(i, i + len(rule.tokens)), rule.class_id, source))
    return sorted(found, key=lambda m: (m.span.start, m.span.end, m.class_id))


# -- pattern assembly -------------------------------------------------------------


def is_compatible(kb: KnowledgeBase, anchor: str, relation: str, target_class: str, anchor_role: Role) -> bool:
    """Class check for an I-R-C pattern.

    The anchor must fall under its side of the relation; the target class
    may sit above or below the opposite side.
    """
    rel = kb.relations[relation]
    anchor_side, open_side = (
        (rel.domain_class, rel.range_class) if anchor_role == "subject" else (rel.range_class, rel.domain_class)
    )
    if not kb.is_subclass(kb.class_of(anchor), anchor_side):
        return False
    return kb.is_subclass(target_class, open_side) or kb.is_subclass(open_side, target_class)


def _nearest(span: Span, mentions):
    # min() keeps the first of equal keys; mentions are in left-to-right order
    best = min((span.distance(m.span) for m in mentions), default=None)
    if best is None:
        return []
    return [m for m in mentions if span.distance(m.span) == best]


def build_patterns(relation_mentions, entity_mentions, class_mentions, kb: KnowledgeBase, trace=None):
    """Pair each relation mention with its nearest entity and class mentions.

    Ties in distance go to the leftmost mention; several entities on that
    one span (ambiguous alias) each produce a candidate. Candidates failing
    :func:`is_compatible` are dropped and noted in ``trace``.
    """
    trace = [] if trace is None else trace
    patterns: list[RelationPattern] = []
    for rm in relation_mentions:
        label = f"relation {rm.entry.relation!r} ({rm.entry.phrase})"
        entities = _nearest(rm.span, entity_mentions)
        classes = _nearest(rm.span, class_mentions)
        if not entities:
            trace.append(f"{label}: no entity mention to anchor, skipped")
            continue
        if not classes:
            trace.append(f"{label}: no class mention for the open side, skipped")
            continue
        anchor_span = entities[0].span
        anchors = [m for m in entities if m.span == anchor_span]
        target = classes[0]
        if len(classes) > 1:
            trace.append(f"{label}: class tie, kept leftmost {target.class_id}")
        if len({m.span for m in entities}) > 1:
            trace.append(f"{label}: entity tie, kept leftmost {anchors[0].surface!r}")
        role: Role = "object" if rm.entry.unknown_side == "subject" else "subject"
        for am in anchors:
            pattern = RelationPattern(am.entity, rm.entry.relation, target.class_id, role)
            if not is_compatible(kb, *_astuple(pattern)):
                trace.append(f"{label}: dropped {pattern}, class constraints not met")
            elif pattern not in patterns:
                patterns.append(pattern)
                trace.append(f"{label}: pattern {pattern}")
    return patterns


def _astuple(p: RelationPattern):
    return p.anchor, p.relation, p.target_class, p.anchor_role


class QueryAnalyzer:
    """Bundles a knowledge base with its phrase dictionary and class lexicon."""

    def __init__(self, kb: KnowledgeBase, phrases, class_lexicon, window: int = PHRASE_WINDOW):
        self.kb = kb
        self.phrases = list(phrases)
        self.class_lexicon = list(class_lexicon)
        self.window = window

    @classmethod
    def from_files(cls, kb, phrase_path, lexicon_path):
        return cls(kb, load_phrase_dictionary(phrase_path, kb), load_class_lexicon(lexicon_path, kb))

    def analyze(self, text: str) -> QueryAnalysis:
        tokens = tokenize(text)
        relations = detect_relation_mentions(tokens, self.phrases, self.window)
        entities = detect_entity_mentions(tokens, self.kb)
        classes = detect_class_mentions(tokens, self.class_lexicon)
        trace: list[str] = []
        # a class noun inside a recognised name ("city" in "Mexico City") is part of the name
        kept = []
        for cm in classes:
            if cm.source == "class-noun" and any(cm.span.overlaps(em.span) for em in entities):
                trace.append(f"class noun {cm.class_id} at {cm.span.start} is inside an entity name, ignored")
            else:
                kept.append(cm)
        patterns = build_patterns(relations, entities, kept, self.kb, trace)
        return QueryAnalysis(text, tokens, relations, entities, kept, patterns, trace)
