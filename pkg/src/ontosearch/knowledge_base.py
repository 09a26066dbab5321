"""Entity and fact ontology: loading, validation, subclass reasoning, lookups.

Four tab-separated files make up a knowledge base::

    classes.tsv    class_id  parent_id            (root row: empty parent)
    entities.tsv   entity_id primary_name class_id alias1|alias2|...
    relations.tsv  relation_id domain_class range_class
    facts.tsv      subject_id relation_id object_id

Entity ids start with ``#`` themselves, so a comment is a line whose ``#``
is followed by whitespace or nothing.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Literal

from .text import normalize_surface, words

Role = Literal["subject", "object"]

CLASS_FILE = "classes.tsv"
ENTITY_FILE = "entities.tsv"
RELATION_FILE = "relations.tsv"
FACT_FILE = "facts.tsv"


class KnowledgeBaseError(Exception):
    kind = "kb-error"


class KBParseError(KnowledgeBaseError):
    kind = "parse"


class UnknownReferenceError(KnowledgeBaseError):
    kind = "unknown-reference"


class HierarchyCycleError(KnowledgeBaseError):
    kind = "hierarchy-cycle"


class DomainRangeError(KnowledgeBaseError):
    kind = "domain-range"


class DuplicateError(KnowledgeBaseError):
    kind = "duplicate"


@dataclass(frozen=True)
class OntologyClass:
    id: str
    parent: str | None = None


@dataclass(frozen=True)
class NamedEntity:
    id: str
    primary_name: str
    class_id: str
    aliases: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.primary_name not in self.aliases:
            object.__setattr__(self, "aliases", self.aliases | {self.primary_name})


@dataclass(frozen=True)
class RelationType:
    id: str
    domain_class: str
    range_class: str


@dataclass(frozen=True, order=True)
class Fact:
    subject: str
    relation: str
    object: str


@dataclass(frozen=True, eq=False)
class KnowledgeBase:
    """Validated, immutable ontology plus lookup indexes.

    Build through :meth:`build` or :func:`load_knowledge_base`; both check
    every invariant before returning.
    """

    classes: dict[str, OntologyClass]
    entities: dict[str, NamedEntity]
    relations: dict[str, RelationType]
    facts: tuple[Fact, ...]
    alias_index: dict[str, frozenset[str]] = field(repr=False)
    alias_token_index: dict[tuple[str, ...], frozenset[str]] = field(repr=False)
    sp_index: dict[tuple[str, str], frozenset[str]] = field(repr=False)
    po_index: dict[tuple[str, str], frozenset[str]] = field(repr=False)
    _ancestors: dict[str, frozenset[str]] = field(repr=False)

    @classmethod
    def build(cls, classes, entities, relations, facts) -> "KnowledgeBase":
        class_map = _index_unique(classes, "class")
        for c in class_map.values():
            if c.parent is not None and c.parent not in class_map:
                raise UnknownReferenceError(f"class {c.id}: unknown parent {c.parent!r}")
        ancestors = _ancestor_sets(class_map)

        entity_map = _index_unique(entities, "entity")
        for e in entity_map.values():
            if e.class_id not in class_map:
                raise UnknownReferenceError(f"entity {e.id}: unknown class {e.class_id!r}")
        relation_map = _index_unique(relations, "relation")
        for r in relation_map.values():
            for c in (r.domain_class, r.range_class):
                if c not in class_map:
                    raise UnknownReferenceError(f"relation {r.id}: unknown class {c!r}")

        seen: set[Fact] = set()
        for f in facts:
            _check_fact(f, entity_map, relation_map, ancestors)
            if f in seen:
                raise DuplicateError(f"duplicate fact {f.subject} {f.relation} {f.object}")
            seen.add(f)
        return cls._assemble(class_map, entity_map, relation_map, tuple(facts), ancestors)

    @classmethod
    def _assemble(cls, class_map, entity_map, relation_map, facts, ancestors):
        alias_index = defaultdict(set)
        alias_tokens = defaultdict(set)
        for e in entity_map.values():
            for alias in e.aliases:
                alias_index[normalize_surface(alias)].add(e.id)
                toks = tuple(words(alias))
                if toks:
                    alias_tokens[toks].add(e.id)
        sp = defaultdict(set)
        po = defaultdict(set)
        for f in facts:
            sp[f.subject, f.relation].add(f.object)
            po[f.relation, f.object].add(f.subject)
        return cls(
            classes=class_map,
            entities=entity_map,
            relations=relation_map,
            facts=facts,
            alias_index=_freeze(alias_index),
            alias_token_index=_freeze(alias_tokens),
            sp_index=_freeze(sp),
            po_index=_freeze(po),
            _ancestors=ancestors,
        )

    # -- reasoning -------------------------------------------------------

    def is_subclass(self, sub: str, sup: str) -> bool:
        """Reflexive-transitive subclass test along parent links."""
        if sup not in self.classes:
            raise UnknownReferenceError(f"unknown class {sup!r}")
        try:
            return sup in self._ancestors[sub]
        except KeyError:
            raise UnknownReferenceError(f"unknown class {sub!r}") from None

    def class_of(self, entity_id: str) -> str:
        try:
            return self.entities[entity_id].class_id
        except KeyError:
            raise UnknownReferenceError(f"unknown entity {entity_id!r}") from None

    def neighbors(self, anchor: str, relation: str, role: Role = "subject") -> frozenset[str]:
        """Entities linked to ``anchor`` through ``relation``.

        ``role`` is the anchor's position in the fact: with ``"subject"`` the
        objects of ``anchor relation ?`` are returned, with ``"object"`` the
        subjects of ``? relation anchor``.
        """
        if anchor not in self.entities:
            raise UnknownReferenceError(f"unknown entity {anchor!r}")
        if relation not in self.relations:
            raise UnknownReferenceError(f"unknown relation {relation!r}")
        if role == "subject":
            return self.sp_index.get((anchor, relation), frozenset())
        if role == "object":
            return self.po_index.get((relation, anchor), frozenset())
        raise ValueError(f"role must be 'subject' or 'object', not {role!r}")

    def facts_touching(self, entity_id: str) -> Iterator[Fact]:
        for f in self.facts:
            if f.subject == entity_id or f.object == entity_id:
                yield f

    def adjacency(self) -> dict[str, set[str]]:
        """Undirected neighbour sets over all relations."""
        adj: dict[str, set[str]] = defaultdict(set)
        for f in self.facts:
            adj[f.subject].add(f.object)
            adj[f.object].add(f.subject)
        return adj

    def entities_by_alias(self, surface: str) -> frozenset[str]:
        return self.alias_index.get(normalize_surface(surface), frozenset())

    @property
    def max_alias_tokens(self) -> int:
        return max((len(k) for k in self.alias_token_index), default=0)

    def index_snapshot(self) -> tuple:
        """Hashable-comparable view of every index, for round-trip checks."""
        return (
            sorted((k, sorted(v)) for k, v in self.alias_index.items()),
            sorted((k, sorted(v)) for k, v in self.sp_index.items()),
            sorted((k, sorted(v)) for k, v in self.po_index.items()),
        )


def _freeze(d):
    return {k: frozenset(v) for k, v in d.items()}


def _index_unique(items, what):
    out = {}
    for item in items:
        if item.id in out:
            raise DuplicateError(f"duplicate {what} id {item.id!r}")
        out[item.id] = item
    return out


def _ancestor_sets(class_map: dict[str, OntologyClass]) -> dict[str, frozenset[str]]:
    ancestors: dict[str, frozenset[str]] = {}
    for start in class_map:
        chain = []
        node: str | None = start
        while node is not None and node not in ancestors:
            if node in chain:
                cycle = " -> ".join(chain[chain.index(node):] + [node])
                raise HierarchyCycleError(f"class hierarchy cycle: {cycle}")
            chain.append(node)
            node = class_map[node].parent
        above = ancestors[node] if node is not None else frozenset()
        for c in reversed(chain):
            above = above | {c}
            ancestors[c] = above
    roots = sorted(c.id for c in class_map.values() if c.parent is None)
    if class_map and len(roots) != 1:
        raise HierarchyCycleError(f"class hierarchy must have exactly one root, found {roots}")
    return ancestors


def _check_fact(f, entity_map, relation_map, ancestors):
    for e in (f.subject, f.object):
        if e not in entity_map:
            raise UnknownReferenceError(f"fact {f.subject} {f.relation} {f.object}: unknown entity {e!r}")
    rel = relation_map.get(f.relation)
    if rel is None:
        raise UnknownReferenceError(f"fact {f.subject} {f.relation} {f.object}: unknown relation")
    s_cls = entity_map[f.subject].class_id
    o_cls = entity_map[f.object].class_id
    if rel.domain_class not in ancestors[s_cls]:
        raise DomainRangeError(
            f"fact {f.subject} {f.relation} {f.object}: subject class {s_cls} "
            f"is not a subclass of domain {rel.domain_class}"
        )
    if rel.range_class not in ancestors[o_cls]:
        raise DomainRangeError(
            f"fact {f.subject} {f.relation} {f.object}: object class {o_cls} "
            f"is not a subclass of range {rel.range_class}"
        )


# -- file formats ----------------------------------------------------------


def is_comment(line: str) -> bool:
    return line.startswith("#") and (len(line) == 1 or line[1].isspace())


def read_rows(path: str | Path, min_fields: int, max_fields: int) -> Iterator[tuple[int, list[str]]]:
    """Yield ``(line_number, fields)`` for every data line of a TSV file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or is_comment(line):
                continue
            fields = [x.strip() for x in line.split("\t")]
            if not min_fields <= len(fields) <= max_fields or not fields[0]:
                raise KBParseError(
                    f"{path}:{lineno}: expected {min_fields}-{max_fields} tab-separated fields, got {line!r}"
                )
            yield lineno, fields


def _parse_classes(path):
    for _, (cid, *rest) in read_rows(path, 1, 2):
        parent = rest[0] if rest and rest[0] else None
        yield OntologyClass(cid, parent)


def _parse_entities(path):
    for lineno, fields in read_rows(path, 3, 4):
        eid, name, cls = fields[:3]
        if not eid.startswith("#") or not name or not cls:
            raise KBParseError(f"{path}:{lineno}: malformed entity row")
        aliases = {a.strip() for a in fields[3].split("|") if a.strip()} if len(fields) > 3 else set()
        yield NamedEntity(eid, name, cls, frozenset(aliases))


def _parse_relations(path):
    for lineno, fields in read_rows(path, 3, 3):
        if not all(fields):
            raise KBParseError(f"{path}:{lineno}: malformed relation row")
        yield RelationType(*fields)


def _parse_facts(path):
    for lineno, fields in read_rows(path, 3, 3):
        if not all(fields):
            raise KBParseError(f"{path}:{lineno}: malformed fact row")
        yield Fact(*fields)


def load_knowledge_base(class_path, entity_path, relation_path, fact_path) -> KnowledgeBase:
    return KnowledgeBase.build(
        list(_parse_classes(class_path)),
        list(_parse_entities(entity_path)),
        list(_parse_relations(relation_path)),
        list(_parse_facts(fact_path)),
    )


def load_kb_dir(directory: str | Path) -> KnowledgeBase:
    d = Path(directory)
    return load_knowledge_base(d / CLASS_FILE, d / ENTITY_FILE, d / RELATION_FILE, d / FACT_FILE)


def save_knowledge_base(kb: KnowledgeBase, directory: str | Path) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / CLASS_FILE, "w", encoding="utf-8") as fh:
        for c in sorted(kb.classes.values(), key=lambda c: c.id):
            fh.write(f"{c.id}\t{c.parent or ''}\n")
    with open(d / ENTITY_FILE, "w", encoding="utf-8") as fh:
        for e in sorted(kb.entities.values(), key=lambda e: e.id):
            fh.write(f"{e.id}\t{e.primary_name}\t{e.class_id}\t{'|'.join(sorted(e.aliases))}\n")
    with open(d / RELATION_FILE, "w", encoding="utf-8") as fh:
        for r in sorted(kb.relations.values(), key=lambda r: r.id):
            fh.write(f"{r.id}\t{r.domain_class}\t{r.range_class}\n")
    with open(d / FACT_FILE, "w", encoding="utf-8") as fh:
        for f in sorted(kb.facts):
            fh.write(f"{f.subject}\t{f.relation}\t{f.object}\n")


def fixture_dir(name: str = "fixture"):
    """Path-like handle to a bundled data directory (``fixture`` or ``benchmark``)."""
    return resources.files("ontosearch") / "data" / name


def load_fixture(name: str = "fixture") -> KnowledgeBase:
    with resources.as_file(fixture_dir(name)) as d:
        return load_kb_dir(d)
