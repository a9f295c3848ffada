import json
import random

import pytest

from ontotopics import (
    AliasCollisionError,
    Concept,
    Edge,
    EdgeTypeError,
    Ontology,
    OntologyError,
    OntologyParseError,
    StructureNode,
    UnknownNodeError,
    load_ontology,
    save_ontology,
)


def table1_concepts():
    rows = [
        (("ultraviolet", "radiation"), ("uv",)),
        (("forcing", "mechanism"), ()),
        (("fossil", "fuel"), ()),
        (("water", "vapor"), ("wv",)),  # extra fixture acronym
        (("general", "circulation", "model"), ("gcm",)),
        (("fluorinated", "gases"), ()),
        (("united", "nations", "framework", "convention", "on", "climate",
          "change"), ("unfccc",)),
        (("feedback", "mechanisms"), ()),
        (("100-year", "flood", "levels"), ()),
    ]
    return [
        Concept("c:" + "_".join(canonical), canonical, acronyms=acr,
                source="table1")
        for canonical, acr in rows
    ]


def test_single_concept_load(tmp_path):
    path = tmp_path / "onto.jsonl"
    path.write_text(
        '{"t":"concept","id":"c1","canonical":["fossil","fuel"],'
        '"acronyms":[],"aliases":[],"source":"g"}\n'
    )
    o = load_ontology(path)
    assert len(o.concepts) == 1
    assert o.alias_index == {("fossil", "fuel"): "c1"}


def test_acronym_maps_to_same_id(tmp_path):
    path = tmp_path / "onto.jsonl"
    path.write_text(
        '{"t":"concept","id":"c1","canonical":["ultraviolet","radiation"],'
        '"acronyms":["uv"],"aliases":[],"source":"g"}\n'
    )
    o = load_ontology(path)
    assert o.resolve(["ultraviolet", "radiation"]) == "c1"
    assert o.resolve(["uv"]) == "c1"


def test_alias_collision_names_surface_form():
    c1 = Concept("c1", ("general", "circulation", "model"), acronyms=("gcm",))
    c2 = Concept("c2", ("global", "climate", "model"), acronyms=("gcm",))
    with pytest.raises(AliasCollisionError, match="gcm"):
        Ontology([c1, c2])


def test_parse_error_reports_line(tmp_path):
    path = tmp_path / "onto.jsonl"
    path.write_text('{"t":"concept","id":"c1","canonical":["a"]}\nnot json\n')
    with pytest.raises(OntologyParseError, match="line 2"):
        load_ontology(path)


def test_unknown_record_kind(tmp_path):
    path = tmp_path / "onto.jsonl"
    path.write_text('{"t":"mystery"}\n')
    with pytest.raises(OntologyParseError, match="line 1"):
        load_ontology(path)


def test_empty_roundtrip(tmp_path):
    path = tmp_path / "onto.jsonl"
    save_ontology(Ontology(), path)
    assert path.read_text() == ""
    assert load_ontology(path) == Ontology()


def test_table1_roundtrip(tmp_path):
    o = Ontology(table1_concepts())
    path = tmp_path / "onto.jsonl"
    save_ontology(o, path)
    o2 = load_ontology(path)
    assert o2 == o
    assert len(o2.concepts) == 9
    acronyms = sorted(a for c in o2.concepts.values() for a in c.acronyms)
    assert acronyms == ["gcm", "unfccc", "uv", "wv"]


def test_weight_roundtrip_full_precision(tmp_path):
    nodes = [
        StructureNode("t:a:0", "Topic", {"domain": "a", "index": 0}),
        StructureNode("t:b:0", "Topic", {"domain": "b", "index": 0}),
    ]
    edges = [Edge("t:a:0", "mappedTo", "t:b:0", 0.42)]
    o = Ontology(nodes=nodes, edges=edges)
    path = tmp_path / "onto.jsonl"
    save_ontology(o, path)
    o2 = load_ontology(path)
    assert o2.edges[0].weight == 0.42
    assert o2 == o


def test_save_is_byte_stable(tmp_path):
    o = Ontology(table1_concepts())
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_ontology(o, p1)
    save_ontology(load_ontology(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_resolve_enso_and_absent():
    o = Ontology([
        Concept("c:enso", ("el", "nino", "southern", "oscillation"),
                acronyms=("enso",)),
        Concept("c:bc", ("black", "carbon")),
    ])
    assert o.resolve(["enso"]) == "c:enso"
    assert o.resolve(["el", "nino", "southern", "oscillation"]) == "c:enso"
    assert o.resolve(["black", "carbon"]) == "c:bc"
    assert o.resolve(["purple", "carbon"]) is None


def chapter_fixture():
    concepts = [Concept("c_bc", ("black", "carbon")),
                Concept("c_ff", ("fossil", "fuel")),
                Concept("c_wv", ("water", "vapor"))]
    nodes = [StructureNode("ch1", "Chapter", {"number": 1, "title": "Ch 1"}),
             StructureNode("ch2", "Chapter", {"number": 2, "title": "Ch 2"})]
    edges = [Edge("ch1", "mentionsConcept", "c_bc", 5.0),
             Edge("ch1", "mentionsConcept", "c_ff", 2.0)]
    return Ontology(concepts, nodes, edges)


def test_chapter_concepts_sorted_and_empty():
    o = chapter_fixture()
    assert o.chapter_concepts("ch1") == [("c_bc", 5.0), ("c_ff", 2.0)]
    assert o.chapter_concepts("ch2") == []
    with pytest.raises(UnknownNodeError):
        o.chapter_concepts("nope")


def test_chapter_concepts_tie_breaks_by_id():
    o = chapter_fixture().with_additions(
        edges=[Edge("ch2", "mentionsConcept", "c_wv", 3.0),
               Edge("ch2", "mentionsConcept", "c_bc", 3.0)])
    assert o.chapter_concepts("ch2") == [("c_bc", 3.0), ("c_wv", 3.0)]


def test_edge_typing_rejected():
    nodes = [StructureNode("b1", "Book", {"category": "impacts"}),
             StructureNode("ch1", "Chapter", {"number": 1})]
    Ontology(nodes=nodes, edges=[Edge("b1", "hasChapter", "ch1")])  # fine
    with pytest.raises(EdgeTypeError):
        Ontology(nodes=nodes, edges=[Edge("ch1", "hasChapter", "b1")])
    with pytest.raises(EdgeTypeError):
        Ontology(nodes=nodes, edges=[Edge("b1", "mentionsConcept", "c_x")])
    with pytest.raises(EdgeTypeError):
        Ontology(nodes=nodes, edges=[Edge("b1", "hasChapter", "ch1", -1.0)])


def test_publication_level_cites_allowed():
    nodes = [StructureNode("p1", "Publication", {"title": "one"}),
             StructureNode("p2", "Publication", {"title": "two"})]
    o = Ontology(nodes=nodes, edges=[Edge("p2", "cites", "p1")])
    assert len(o.edges) == 1


def test_mapped_to_weight_range():
    nodes = [StructureNode("t:a:0", "Topic", {"domain": "a", "index": 0}),
             StructureNode("t:b:0", "Topic", {"domain": "b", "index": 0})]
    with pytest.raises(EdgeTypeError):
        Ontology(nodes=nodes, edges=[Edge("t:a:0", "mappedTo", "t:b:0", 1.5)])


def test_node_invariants():
    with pytest.raises(OntologyError):
        StructureNode("ar9", "AssessmentReport", {"period": 9}).validate()
    with pytest.raises(OntologyError):
        StructureNode("ch0", "Chapter", {"number": 0}).validate()
    with pytest.raises(OntologyError):
        StructureNode("b", "Book", {"category": "novels"}).validate()


def test_concept_invariants():
    with pytest.raises(OntologyError):
        Concept("c1", ())
    with pytest.raises(OntologyError):
        Concept("c1", ("Black", "carbon"))
    with pytest.raises(OntologyError):
        Concept("c1", ("x-ray",), acronyms=("the",))  # stop word acronym


def _random_ontology(rng: random.Random) -> Ontology:
    words = [f"tok{i}" for i in range(30)]
    concepts = []
    used = set()
    for i in range(rng.randint(0, 8)):
        canonical = tuple(rng.sample(words, rng.randint(1, 4)))
        if canonical in used:
            continue
        used.add(canonical)
        acr = (f"ac{i}",) if rng.random() < 0.5 else ()
        concepts.append(Concept(f"c{i}", canonical, acronyms=acr))
    nodes = [StructureNode(f"ch{i}", "Chapter", {"number": i + 1})
             for i in range(rng.randint(0, 4))]
    edges = []
    for node in nodes:
        for c in concepts:
            if rng.random() < 0.3:
                edges.append(Edge(node.id, "mentionsConcept", c.id,
                                  round(rng.random() * 10, 6)))
    return Ontology(concepts, nodes, edges)


def test_roundtrip_property_random(tmp_path):
    rng = random.Random(20260809)
    for trial in range(25):
        o = _random_ontology(rng)
        path = tmp_path / f"o{trial}.jsonl"
        save_ontology(o, path)
        assert load_ontology(path) == o


def test_alias_index_is_function_over_surfaces():
    rng = random.Random(99)
    for _ in range(10):
        o = _random_ontology(rng)
        forms = [f for c in o.concepts.values() for f in c.surface_forms()]
        assert set(forms) == set(o.alias_index)
        for c in o.concepts.values():
            for f in c.surface_forms():
                assert o.alias_index[f] == c.id


def test_serialization_order_is_canonical(tmp_path):
    o = chapter_fixture()
    path = tmp_path / "onto.jsonl"
    save_ontology(o, path)
    kinds = [json.loads(line)["t"] for line in path.read_text().splitlines()]
    assert kinds == sorted(kinds, key=["concept", "node", "edge"].index)
