"""Linking trained topics into the ontology and mining author networks.

Topics become Topic nodes with mentionsConcept edges (weight = term
probability); chapters gain hasTopic edges where their topic share clears a
threshold.  Cross-domain topic pairs are scored by cosine similarity over
the concepts in their top terms, and author graphs are built from the
chapter/publication citation structure.  Everything iterates in sorted
order, so outputs are invariant to input ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import sqrt

from .ontology import Edge, Ontology, OntologyError, StructureNode
from .preprocess import match_concepts, tokenize


class LinkError(OntologyError):
    """Raised for label collisions or unlinked domains."""


@dataclass
class TopicMappingRecord:
    """A scored correspondence between topics of two model domains."""

    topic_a: tuple[str, int]
    topic_b: tuple[str, int]
    shared_concepts: list[str]
    score: float


@dataclass(frozen=True)
class GraphEdge:
    a: str
    b: str
    kind: str  # cocited_in_chapter | cites_author | shared_concept
    evidence: tuple[str, ...]


@dataclass
class AuthorGraph:
    nodes: tuple[str, ...]
    edges: tuple[GraphEdge, ...]


def topic_node_id(domain_label: str, index: int) -> str:
    return f"topic:{domain_label}:{index}"


def link_topics(o: Ontology, m, domain_label: str, n: int,
                threshold: float | None = None) -> Ontology:
    """Write a trained model's topics into the ontology.

    Adds one Topic node per topic, mentionsConcept edges for concepts among
    the topic's top-n terms (weight = phi), and hasTopic edges from every
    chapter whose theta for the topic is >= threshold (default 1/K).
    """
    if threshold is None:
        threshold = 1.0 / m.k
    for node in o.nodes.values():
        if node.kind == "Topic" and node.attrs.get("domain") == domain_label:
            raise LinkError(f"domain label {domain_label!r} already linked")
    if m.vocabulary is None:
        raise LinkError("model carries no vocabulary; cannot link topics")

    nodes, edges = [], []
    n_eff = min(n, m.v)
    for k in range(m.k):
        tid = topic_node_id(domain_label, k)
        nodes.append(StructureNode(tid, "Topic",
                                   {"domain": domain_label, "index": k}))
        probs = m.phi[k]
        order = sorted(range(m.v), key=lambda w: (-probs[w], w))[:n_eff]
        for w in order:
            entry = m.vocabulary.entries[w]
            if not entry.is_concept:
                continue
            if entry.term not in o.concepts:
                raise LinkError(
                    f"model concept {entry.term!r} is not in the ontology"
                )
            edges.append(Edge(tid, "mentionsConcept", entry.term, float(probs[w])))

    for d, doc_id in enumerate(m.doc_ids):
        node = o.nodes.get(doc_id)
        if node is None or node.kind != "Chapter":
            continue
        for k in range(m.k):
            if m.theta[d, k] >= threshold:
                edges.append(Edge(doc_id, "hasTopic", topic_node_id(domain_label, k)))
    return o.with_additions(nodes=nodes, edges=edges)


def _topic_concept_weights(o: Ontology, label: str, n: int
                           ) -> list[tuple[int, str, dict[str, float]]]:
    topics = sorted(
        (node.attrs["index"], node.id)
        for node in o.nodes.values()
        if node.kind == "Topic" and node.attrs.get("domain") == label
    )
    if not topics:
        raise LinkError(f"domain label {label!r} has no linked topics")
    out = []
    for index, node_id in topics:
        weights = {
            e.object: (e.weight if e.weight is not None else 0.0)
            for e in o.edges
            if e.subject == node_id and e.predicate == "mentionsConcept"
        }
        top = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))[:n]
        out.append((index, node_id, dict(top)))
    return out


def map_topics(o: Ontology, label_a: str, label_b: str, n: int,
               threshold: float = 0.2, metric: str = "cosine"
               ) -> tuple[list[TopicMappingRecord], Ontology]:
    """Score all topic pairs across two linked domains via shared concepts.

    The score is cosine similarity of the two phi vectors restricted to the
    union of both topics' top-n concept ids (or Jaccard over the concept
    sets with metric="jaccard").  Pairs scoring >= threshold are returned
    sorted by score descending and written back as mappedTo edges.
    """
    if metric not in ("cosine", "jaccard"):
        raise LinkError(f"unknown mapping metric {metric!r}")
    topics_a = _topic_concept_weights(o, label_a, n)
    topics_b = _topic_concept_weights(o, label_b, n)

    records, edges = [], []
    for ia, node_a, wa in topics_a:
        for ib, node_b, wb in topics_b:
            shared = sorted(set(wa) & set(wb))
            union = sorted(set(wa) | set(wb))
            if not union:
                score = 0.0
            elif metric == "jaccard":
                score = len(shared) / len(union)
            else:
                dot = 0.0
                qa = 0.0
                qb = 0.0
                for c in union:
                    va = wa.get(c, 0.0)
                    vb = wb.get(c, 0.0)
                    dot += va * vb
                    qa += va * va
                    qb += vb * vb
                score = 0.0 if qa == 0.0 or qb == 0.0 else dot / (sqrt(qa) * sqrt(qb))
            score = min(score, 1.0)
            if score >= threshold:
                records.append(
                    TopicMappingRecord((label_a, ia), (label_b, ib), shared, score)
                )
                edges.append(Edge(node_a, "mappedTo", node_b, score))
    records.sort(key=lambda r: (-r.score, r.topic_a[1], r.topic_b[1]))
    return records, o.with_additions(edges=edges)


def _normalize_author(name: str) -> str:
    return " ".join(name.split()).casefold()


def build_author_graph(o: Ontology, shared_concept_chapters: int = 3
                       ) -> AuthorGraph:
    """Author social network from the citation structure.

    - cocited_in_chapter (undirected): both authors' publications cited by a
      common chapter; evidence lists those chapters.
    - cites_author (directed): a publication of one author cites a
      publication of the other; evidence lists the citing publications.
    - shared_concept (undirected): the pair is co-cited in at least
      `shared_concept_chapters` chapters that mention a common concept;
      evidence is the concept followed by those chapters.
    """
    pub_authors: dict[str, set[str]] = {}
    chapter_cites: dict[str, list[str]] = {}
    pub_cites: dict[str, list[str]] = {}
    chapter_concepts: dict[str, set[str]] = {}
    for e in o.edges:
        if e.predicate == "hasAuthor":
            name = _normalize_author(o.nodes[e.object].attrs["name"])
            pub_authors.setdefault(e.subject, set()).add(name)
        elif e.predicate == "cites":
            if o.nodes[e.subject].kind == "Chapter":
                chapter_cites.setdefault(e.subject, []).append(e.object)
            else:
                pub_cites.setdefault(e.subject, []).append(e.object)
        elif e.predicate == "mentionsConcept":
            if o.nodes[e.subject].kind == "Chapter":
                chapter_concepts.setdefault(e.subject, set()).add(e.object)

    names = sorted(
        _normalize_author(node.attrs["name"])
        for node in o.nodes.values()
        if node.kind == "Author"
    )

    cocited: dict[tuple[str, str], set[str]] = {}
    for ch in sorted(chapter_cites):
        authors: set[str] = set()
        for pub in chapter_cites[ch]:
            authors |= pub_authors.get(pub, set())
        for a, b in combinations(sorted(authors), 2):
            cocited.setdefault((a, b), set()).add(ch)

    citations: dict[tuple[str, str], set[str]] = {}
    for pub in sorted(pub_cites):
        for cited in sorted(pub_cites[pub]):
            for a in sorted(pub_authors.get(pub, set())):
                for b in sorted(pub_authors.get(cited, set())):
                    if a != b:
                        citations.setdefault((a, b), set()).add(pub)

    edges = []
    for (a, b), chapters in cocited.items():
        edges.append(GraphEdge(a, b, "cocited_in_chapter", tuple(sorted(chapters))))
        for concept in sorted(set().union(*(chapter_concepts.get(ch, set())
                                            for ch in chapters))):
            hits = sorted(ch for ch in chapters
                          if concept in chapter_concepts.get(ch, set()))
            if len(hits) >= shared_concept_chapters:
                edges.append(GraphEdge(a, b, "shared_concept",
                                       (concept, *hits)))
    for (a, b), pubs in citations.items():
        edges.append(GraphEdge(a, b, "cites_author", tuple(sorted(pubs))))

    edges.sort(key=lambda e: (e.a, e.b, e.kind, e.evidence))
    return AuthorGraph(nodes=tuple(dict.fromkeys(names)), edges=tuple(edges))


def export_graph(g: AuthorGraph, path) -> None:
    """Write <path>.nodes.tsv and <path>.edges.tsv, deterministically sorted."""
    base = str(path)
    degree = {name: 0 for name in g.nodes}
    for e in g.edges:
        degree[e.a] = degree.get(e.a, 0) + 1
        degree[e.b] = degree.get(e.b, 0) + 1
    with open(base + ".nodes.tsv", "w", encoding="utf-8") as fh:
        fh.write("author\tdegree\n")
        for name in sorted(degree):
            fh.write(f"{name}\t{degree[name]}\n")
    with open(base + ".edges.tsv", "w", encoding="utf-8") as fh:
        fh.write("a\tb\tkind\tn_evidence\tevidence\n")
        for e in sorted(g.edges, key=lambda e: (e.a, e.b, e.kind, e.evidence)):
            fh.write(f"{e.a}\t{e.b}\t{e.kind}\t{len(e.evidence)}\t"
                     f"{';'.join(e.evidence)}\n")


def import_graph(path) -> AuthorGraph:
    """Read a graph exported by export_graph."""
    base = str(path)
    nodes = []
    with open(base + ".nodes.tsv", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            nodes.append(line.rstrip("\n").split("\t")[0])
    edges = []
    with open(base + ".edges.tsv", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            a, b, kind, _, evidence = line.rstrip("\n").split("\t")
            edges.append(GraphEdge(a, b, kind,
                                   tuple(evidence.split(";")) if evidence else ()))
    return AuthorGraph(nodes=tuple(nodes), edges=tuple(edges))


def _pub_node_id(title: str) -> str:
    return "pub:" + " ".join(tokenize(title))


def _author_node_id(name: str) -> str:
    return "author:" + _normalize_author(name)


def ontology_from_documents(docs, base: Ontology) -> Ontology:
    """Build report structure and citation nodes/edges from document metadata.

    Each document becomes a Chapter (with AssessmentReport/Book parents when
    the meta names them); citation records become Publication and Author
    nodes with cites/hasAuthor edges, and a citation record's optional
    "cites" list of titles becomes publication-level cites edges.  When the
    base ontology has concepts, chapters also get mentionsConcept edges
    weighted by corpus occurrence counts.
    """
    nodes: dict[str, StructureNode] = {}
    edges: set[Edge] = set()

    def add_node(node: StructureNode):
        if node.id not in nodes and node.id not in base.nodes:
            nodes[node.id] = node

    for doc in sorted(docs, key=lambda d: d.doc_id):
        meta = doc.meta or {}
        period = meta.get("report_period")
        book = meta.get("book")
        chapter_id = doc.doc_id
        add_node(StructureNode(chapter_id, "Chapter", {
            "number": int(meta.get("chapter_number", 1)),
            "title": meta.get("title", ""),
        }))
        if period is not None:
            ar_id = f"ar:{period}"
            add_node(StructureNode(ar_id, "AssessmentReport", {"period": int(period)}))
            if book is not None:
                book_id = f"book:{period}:{book}"
                add_node(StructureNode(book_id, "Book", {"category": book}))
                edges.add(Edge(ar_id, "hasBook", book_id))
                edges.add(Edge(book_id, "hasChapter", chapter_id))

        title_to_pub = {}
        for cit in meta.get("citations", ()):
            pub_id = _pub_node_id(cit["title"])
            title_to_pub[cit["title"]] = pub_id
            attrs = {"title": cit["title"]}
            if cit.get("year") is not None:
                attrs["year"] = int(cit["year"])
            add_node(StructureNode(pub_id, "Publication", attrs))
            edges.add(Edge(chapter_id, "cites", pub_id))
            for name in cit.get("authors", ()):
                author_id = _author_node_id(name)
                add_node(StructureNode(author_id, "Author", {"name": name}))
                edges.add(Edge(pub_id, "hasAuthor", author_id))
        for cit in meta.get("citations", ()):
            for cited_title in cit.get("cites", ()):
                cited_id = title_to_pub.get(cited_title, _pub_node_id(cited_title))
                if cited_id not in nodes and cited_id not in base.nodes:
                    add_node(StructureNode(cited_id, "Publication",
                                           {"title": cited_title}))
                edges.add(Edge(_pub_node_id(cit["title"]), "cites", cited_id))

        if base.concepts:
            mention_counts: dict[str, int] = {}
            for u in match_concepts(tokenize(doc.text), base).units:
                if u.is_concept:
                    mention_counts[u.concept_id] = mention_counts.get(u.concept_id, 0) + 1
            for cid in sorted(mention_counts):
                edges.add(Edge(chapter_id, "mentionsConcept", cid,
                               float(mention_counts[cid])))

    return base.with_additions(nodes=list(nodes.values()), edges=sorted(edges, key=Edge.sort_key))
