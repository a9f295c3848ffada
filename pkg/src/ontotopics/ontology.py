"""Typed concept-and-structure graph backing the topic pipeline.

An Ontology bundles multiword domain concepts (with acronyms and aliases),
report-structure nodes (assessment reports, books, chapters, publications,
authors, topics) and typed edges between them.  It is immutable once built;
the linking phase produces new Ontology values via `with_additions`.

On-disk format is UTF-8 JSON lines: concept records, then node records,
then edge records, each kind sorted by id, compact separators — so a saved
ontology is byte-stable and save/load round-trips exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .stopwords import DEFAULT_STOPWORDS

NODE_KINDS = frozenset(
    {"AssessmentReport", "Book", "Chapter", "Publication", "Author", "Topic"}
)

BOOK_CATEGORIES = frozenset({"physical_science", "impacts", "mitigation", "synthesis"})

# predicate -> (allowed subject kinds, allowed object kinds).
# "_concept_" marks predicates whose object is a concept id, not a node id.
CONCEPT_OBJECT = "_concept_"
PREDICATE_TABLE = {
    "hasBook": (frozenset({"AssessmentReport"}), frozenset({"Book"})),
    "hasChapter": (frozenset({"Book"}), frozenset({"Chapter"})),
    "cites": (frozenset({"Chapter", "Publication"}), frozenset({"Publication"})),
    "hasAuthor": (frozenset({"Publication"}), frozenset({"Author"})),
    "hasTopic": (frozenset({"Chapter"}), frozenset({"Topic"})),
    "mentionsConcept": (frozenset({"Chapter", "Topic"}), CONCEPT_OBJECT),
    "mappedTo": (frozenset({"Topic"}), frozenset({"Topic"})),
}


class OntologyError(Exception):
    """Base error for ontology construction and I/O."""


class OntologyParseError(OntologyError):
    """A record in an ontology file could not be parsed."""


class AliasCollisionError(OntologyError):
    """The same surface form is claimed by two different concepts."""


class EdgeTypeError(OntologyError):
    """An edge violates the predicate domain/range table."""


class UnknownNodeError(OntologyError):
    """A node id was referenced but is not in the ontology."""


@dataclass(frozen=True)
class Concept:
    """A canonical multiword domain phrase with acronyms and aliases.

    All surface tokens are normalized (lowercase, stripped); acronyms are
    single tokens and must not collide with stop words.
    """

    id: str
    canonical: tuple[str, ...]
    acronyms: tuple[str, ...] = ()
    aliases: tuple[tuple[str, ...], ...] = ()
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "canonical", tuple(self.canonical))
        object.__setattr__(self, "acronyms", tuple(self.acronyms))
        object.__setattr__(self, "aliases", tuple(tuple(a) for a in self.aliases))
        self._validate()

    def _validate(self):
        if not self.id:
            raise OntologyError("concept id must be non-empty")
        if not self.canonical:
            raise OntologyError(f"concept {self.id!r}: canonical must be non-empty")
        for form in (self.canonical, *self.aliases):
            for tok in form:
                if not tok or tok != tok.strip() or tok != tok.lower():
                    raise OntologyError(
                        f"concept {self.id!r}: token {tok!r} not normalized"
                    )
        for acr in self.acronyms:
            if not acr or acr != acr.strip() or acr != acr.lower():
                raise OntologyError(f"concept {self.id!r}: acronym {acr!r} not normalized")
            if acr in DEFAULT_STOPWORDS:
                raise OntologyError(
                    f"concept {self.id!r}: acronym {acr!r} equals a stop word"
                )

    def surface_forms(self):
        """All token sequences that resolve to this concept."""
        yield self.canonical
        for alias in self.aliases:
            yield alias
        for acr in self.acronyms:
            yield (acr,)


@dataclass
class StructureNode:
    """A typed node: report structure, publication, author or topic."""

    id: str
    kind: str
    attrs: dict = field(default_factory=dict)

    def validate(self):
        if not self.id:
            raise OntologyError("node id must be non-empty")
        if self.kind not in NODE_KINDS:
            raise OntologyError(f"node {self.id!r}: unknown kind {self.kind!r}")
        a = self.attrs
        if self.kind == "AssessmentReport":
            if a.get("period") not in (1, 2, 3, 4, 5):
                raise OntologyError(f"node {self.id!r}: period must be 1..5")
        elif self.kind == "Book":
            if a.get("category") not in BOOK_CATEGORIES:
                raise OntologyError(
                    f"node {self.id!r}: category must be one of {sorted(BOOK_CATEGORIES)}"
                )
        elif self.kind == "Chapter":
            num = a.get("number")
            if not isinstance(num, int) or num <= 0:
                raise OntologyError(f"node {self.id!r}: chapter number must be positive")
        elif self.kind == "Publication":
            if not a.get("title"):
                raise OntologyError(f"node {self.id!r}: publication needs a title")
        elif self.kind == "Author":
            if not a.get("name"):
                raise OntologyError(f"node {self.id!r}: author needs a name")
        elif self.kind == "Topic":
            if not a.get("domain") or not isinstance(a.get("index"), int) or a["index"] < 0:
                raise OntologyError(
                    f"node {self.id!r}: topic needs a domain label and index >= 0"
                )


@dataclass(frozen=True)
class Edge:
    """Typed edge; weight is optional and non-negative where present."""

    subject: str
    predicate: str
    object: str
    weight: float | None = None

    def sort_key(self):
        return (
            self.subject,
            self.predicate,
            self.object,
            self.weight is not None,
            self.weight if self.weight is not None else 0.0,
        )


class Ontology:
    """Immutable validated graph of concepts, nodes and edges."""

    def __init__(self, concepts=(), nodes=(), edges=()):
        concept_list = sorted(concepts, key=lambda c: c.id)
        node_list = sorted(nodes, key=lambda n: n.id)
        edge_list = sorted(edges, key=Edge.sort_key)

        self.concepts: dict[str, Concept] = {}
        for c in concept_list:
            if c.id in self.concepts:
                raise OntologyError(f"duplicate concept id {c.id!r}")
            self.concepts[c.id] = c

        seen_canonical: dict[tuple[str, ...], str] = {}
        for c in concept_list:
            if c.canonical in seen_canonical:
                raise OntologyError(
                    f"canonical {' '.join(c.canonical)!r} claimed by both "
                    f"{seen_canonical[c.canonical]!r} and {c.id!r}"
                )
            seen_canonical[c.canonical] = c.id

        self.alias_index: dict[tuple[str, ...], str] = {}
        for c in concept_list:
            for form in c.surface_forms():
                owner = self.alias_index.get(form)
                if owner is not None and owner != c.id:
                    raise AliasCollisionError(
                        f"surface form {' '.join(form)!r} claimed by both "
                        f"{owner!r} and {c.id!r}"
                    )
                self.alias_index[form] = c.id

        self.nodes: dict[str, StructureNode] = {}
        for n in node_list:
            n.validate()
            if n.id in self.nodes:
                raise OntologyError(f"duplicate node id {n.id!r}")
            if n.id in self.concepts:
                raise OntologyError(f"id {n.id!r} used for both a node and a concept")
            self.nodes[n.id] = n

        for e in edge_list:
            self._validate_edge(e)
        self.edges: tuple[Edge, ...] = tuple(edge_list)

        self.max_surface_len = max(
            (len(f) for f in self.alias_index), default=0
        )

    def _validate_edge(self, e: Edge):
        if e.predicate not in PREDICATE_TABLE:
            raise EdgeTypeError(f"unknown predicate {e.predicate!r}")
        subj_kinds, obj_kinds = PREDICATE_TABLE[e.predicate]
        subj = self.nodes.get(e.subject)
        if subj is None:
            raise EdgeTypeError(f"edge subject {e.subject!r} is not a known node")
        if subj.kind not in subj_kinds:
            raise EdgeTypeError(
                f"{e.predicate} cannot have subject kind {subj.kind}"
            )
        if obj_kinds is CONCEPT_OBJECT:
            if e.object not in self.concepts:
                raise EdgeTypeError(
                    f"{e.predicate} object {e.object!r} is not a known concept"
                )
        else:
            obj = self.nodes.get(e.object)
            if obj is None:
                raise EdgeTypeError(f"edge object {e.object!r} is not a known node")
            if obj.kind not in obj_kinds:
                raise EdgeTypeError(
                    f"{e.predicate} cannot have object kind {obj.kind}"
                )
        if e.weight is not None:
            if e.weight < 0:
                raise EdgeTypeError(f"{e.predicate} weight must be non-negative")
            if e.predicate == "mappedTo" and not (0.0 <= e.weight <= 1.0):
                raise EdgeTypeError("mappedTo weight must be in [0, 1]")

    def resolve(self, surface) -> str | None:
        """Concept id for a normalized token sequence, or None."""
        return self.alias_index.get(tuple(surface))

    def chapter_concepts(self, chapter_id: str) -> list[tuple[str, float]]:
        """mentionsConcept edges from a chapter, weight-descending then by id."""
        node = self.nodes.get(chapter_id)
        if node is None or node.kind != "Chapter":
            raise UnknownNodeError(f"no chapter with id {chapter_id!r}")
        rows = [
            (e.object, e.weight if e.weight is not None else 0.0)
            for e in self.edges
            if e.subject == chapter_id and e.predicate == "mentionsConcept"
        ]
        rows.sort(key=lambda r: (-r[1], r[0]))
        return rows

    def with_additions(self, concepts=(), nodes=(), edges=()) -> "Ontology":
        """New ontology with extra concepts/nodes/edges (single-writer phase)."""
        return Ontology(
            list(self.concepts.values()) + list(concepts),
            list(self.nodes.values()) + list(nodes),
            list(self.edges) + list(edges),
        )

    def __eq__(self, other):
        if not isinstance(other, Ontology):
            return NotImplemented
        return (
            self.concepts == other.concepts
            and self.nodes == other.nodes
            and set(self.edges) == set(other.edges)
        )

    def __repr__(self):
        return (
            f"Ontology({len(self.concepts)} concepts, {len(self.nodes)} nodes, "
            f"{len(self.edges)} edges)"
        )


def _dump_line(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def save_ontology(o: Ontology, path) -> None:
    """Write the canonical JSON-lines form (byte-stable for equal ontologies)."""
    lines = []
    for c in sorted(o.concepts.values(), key=lambda c: c.id):
        lines.append(
            _dump_line(
                {
                    "t": "concept",
                    "id": c.id,
                    "canonical": list(c.canonical),
                    "acronyms": list(c.acronyms),
                    "aliases": [list(a) for a in c.aliases],
                    "source": c.source,
                }
            )
        )
    for n in sorted(o.nodes.values(), key=lambda n: n.id):
        lines.append(
            _dump_line(
                {"t": "node", "id": n.id, "kind": n.kind,
                 "attrs": dict(sorted(n.attrs.items()))}
            )
        )
    for e in o.edges:
        rec = {"t": "edge", "s": e.subject, "p": e.predicate, "o": e.object}
        if e.weight is not None:
            rec["w"] = e.weight
        lines.append(_dump_line(rec))
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def load_ontology(path) -> Ontology:
    """Parse an ontology file; malformed records report their line number."""
    concepts, nodes, edges = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise OntologyParseError(f"line {lineno}: invalid JSON ({exc.msg})")
            if not isinstance(rec, dict):
                raise OntologyParseError(f"line {lineno}: record must be an object")
            kind = rec.get("t")
            try:
                if kind == "concept":
                    concepts.append(
                        Concept(
                            id=rec["id"],
                            canonical=tuple(rec["canonical"]),
                            acronyms=tuple(rec.get("acronyms", ())),
                            aliases=tuple(tuple(a) for a in rec.get("aliases", ())),
                            source=rec.get("source", ""),
                        )
                    )
                elif kind == "node":
                    nodes.append(
                        StructureNode(id=rec["id"], kind=rec["kind"],
                                      attrs=dict(rec.get("attrs", {})))
                    )
                elif kind == "edge":
                    edges.append(
                        Edge(subject=rec["s"], predicate=rec["p"],
                             object=rec["o"], weight=rec.get("w"))
                    )
                else:
                    raise OntologyParseError(
                        f"line {lineno}: unknown record kind {kind!r}"
                    )
            except KeyError as exc:
                raise OntologyParseError(f"line {lineno}: missing field {exc}")
            except (TypeError, ValueError) as exc:
                raise OntologyParseError(f"line {lineno}: malformed record ({exc})")
    return Ontology(concepts, nodes, edges)
