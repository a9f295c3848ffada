"""Text normalization, concept phrase merging, and corpus encoding.

The pipeline per document is tokenize -> match_concepts -> remove_stopwords,
after which build_corpus assembles a shared vocabulary and encodes every
document as token ids with per-token weights (1 for plain words, 1+boost
for ontology concepts).  All stages are pure and deterministic; vocabulary
order is a fixed sort, so two runs over the same inputs encode identically.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .ontology import Ontology
from .stopwords import DEFAULT_STOPWORDS

# Word segmentation: unicode word characters minus underscore, with interior
# hyphens kept so "100-year" stays one token.
_TOKEN_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*")

CORPUS_FORMAT = "ontotopics-corpus"
CORPUS_VERSION = 1


class CorpusError(Exception):
    """Raised when documents cannot be encoded into a usable corpus."""


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; punctuation dropped, hyphenated words kept."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Unit:
    """One post-merge unit: a plain word, or a matched concept occurrence.

    `surface` is the matched token span, so concatenating unit surfaces
    reproduces the input token sequence exactly.
    """

    surface: tuple[str, ...]
    concept_id: str | None = None

    @property
    def is_concept(self) -> bool:
        return self.concept_id is not None


@dataclass
class TokenStream:
    units: list[Unit]
    weights: list[float]


@dataclass
class Document:
    """A raw input document; meta carries report structure and citations."""

    doc_id: str
    text: str
    meta: dict = field(default_factory=dict)


def match_concepts(tokens: list[str], onto: Ontology) -> TokenStream:
    """Greedy leftmost-longest merge of ontology surface forms.

    At each position the longest surface form (canonical, alias or acronym)
    starting there becomes a single concept unit; otherwise the word passes
    through.  The scan resumes after a match, so merges never overlap.
    Weights are all 1 at this stage; boosts are applied by build_corpus.
    """
    units = []
    i, n = 0, len(tokens)
    max_len = onto.max_surface_len
    while i < n:
        matched = False
        for length in range(min(max_len, n - i), 0, -1):
            span = tuple(tokens[i : i + length])
            cid = onto.alias_index.get(span)
            if cid is not None:
                units.append(Unit(span, cid))
                i += length
                matched = True
                break
        if not matched:
            units.append(Unit((tokens[i],)))
            i += 1
    return TokenStream(units, [1.0] * len(units))


def remove_stopwords(ts: TokenStream, stoplist=None) -> TokenStream:
    """Drop stop-word word units; concept units are never removed."""
    stoplist = DEFAULT_STOPWORDS if stoplist is None else stoplist
    units, weights = [], []
    for u, w in zip(ts.units, ts.weights):
        if not u.is_concept and u.surface[0] in stoplist:
            continue
        units.append(u)
        weights.append(w)
    return TokenStream(units, weights)


@dataclass(frozen=True)
class VocabEntry:
    term: str  # the word itself, or the concept id
    is_concept: bool
    display: str  # word, or canonical phrase with spaces


@dataclass
class Vocabulary:
    """Dense term index over words and concept ids, with document frequency."""

    entries: tuple[VocabEntry, ...]
    word_index: dict[str, int]
    concept_index: dict[str, int]
    doc_freq: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def id_for_unit(self, unit: Unit) -> int | None:
        if unit.is_concept:
            return self.concept_index.get(unit.concept_id)
        return self.word_index.get(unit.surface[0])

    def digest(self) -> str:
        payload = "\n".join(
            f"{int(e.is_concept)}\t{e.term}\t{e.display}" for e in self.entries
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class EncodedDoc:
    doc_id: str
    token_ids: list[int]
    weights: list[float]

    @property
    def mass(self) -> float:
        return sum(self.weights)


@dataclass
class EncodedCorpus:
    docs: list[EncodedDoc]
    vocabulary: Vocabulary
    boost: float


def _doc_units(doc: Document, onto: Ontology, stoplist) -> list[Unit]:
    return remove_stopwords(match_concepts(tokenize(doc.text), onto), stoplist).units


def build_corpus(docs, onto: Ontology, boost: float = 0.0, min_df: int = 2,
                 stoplist=None) -> EncodedCorpus:
    """Encode documents over a shared vocabulary with concept weighting.

    Word terms appearing in fewer than min_df documents are pruned; concept
    terms are exempt from pruning.  Documents are processed in doc_id order,
    which is also the sampler sweep order downstream.
    """
    if boost < 0:
        raise CorpusError("boost must be non-negative")
    if min_df < 1:
        raise CorpusError("min_df must be >= 1")
    stoplist = DEFAULT_STOPWORDS if stoplist is None else stoplist

    docs = sorted(docs, key=lambda d: d.doc_id)
    seen_ids = set()
    for d in docs:
        if d.doc_id in seen_ids:
            raise CorpusError(f"duplicate doc_id {d.doc_id!r}")
        seen_ids.add(d.doc_id)

    per_doc_units = [_doc_units(d, onto, stoplist) for d in docs]

    word_df: dict[str, int] = {}
    concept_df: dict[str, int] = {}
    for units in per_doc_units:
        words = {u.surface[0] for u in units if not u.is_concept}
        cids = {u.concept_id for u in units if u.is_concept}
        for w in words:
            word_df[w] = word_df.get(w, 0) + 1
        for cid in cids:
            concept_df[cid] = concept_df.get(cid, 0) + 1

    kept_words = {w for w, dfreq in word_df.items() if dfreq >= min_df}

    # One combined ordering: sort by rendered term, concepts before words on
    # a tie, so vocabulary ids are reproducible.
    candidates = [
        VocabEntry(cid, True, " ".join(onto.concepts[cid].canonical))
        for cid in concept_df
    ] + [VocabEntry(w, False, w) for w in kept_words]
    candidates.sort(key=lambda e: (e.display, not e.is_concept, e.term))

    word_index, concept_index, freqs = {}, {}, []
    for idx, e in enumerate(candidates):
        if e.is_concept:
            concept_index[e.term] = idx
            freqs.append(concept_df[e.term])
        else:
            word_index[e.term] = idx
            freqs.append(word_df[e.term])
    vocab = Vocabulary(tuple(candidates), word_index, concept_index, tuple(freqs))

    encoded = []
    total_tokens = 0
    for d, units in zip(docs, per_doc_units):
        ids, weights = [], []
        for u in units:
            tid = vocab.id_for_unit(u)
            if tid is None:
                continue  # pruned word
            ids.append(tid)
            weights.append(1.0 + boost if u.is_concept else 1.0)
        encoded.append(EncodedDoc(d.doc_id, ids, weights))
        total_tokens += len(ids)
    if total_tokens == 0:
        raise CorpusError("no usable tokens after preprocessing and pruning")
    return EncodedCorpus(encoded, vocab, boost)


def encode_with_vocabulary(docs, onto: Ontology, vocab: Vocabulary,
                           boost: float = 0.0, stoplist=None
                           ) -> tuple[list[EncodedDoc], int]:
    """Encode held-out documents against an existing vocabulary.

    Terms absent from the vocabulary are skipped; the skip count is returned
    so evaluations can report out-of-vocabulary mass.
    """
    stoplist = DEFAULT_STOPWORDS if stoplist is None else stoplist
    encoded, oov = [], 0
    for d in sorted(docs, key=lambda d: d.doc_id):
        ids, weights = [], []
        for u in _doc_units(d, onto, stoplist):
            tid = vocab.id_for_unit(u)
            if tid is None:
                oov += 1
                continue
            ids.append(tid)
            weights.append(1.0 + boost if u.is_concept else 1.0)
        encoded.append(EncodedDoc(d.doc_id, ids, weights))
    return encoded, oov


def concept_frequency_report(docs, onto: Ontology, targets,
                             group_by: str = "book") -> list[tuple[str, str, int]]:
    """Counts of concept units and residual singleton words per document group.

    Each target is resolved first as a concept surface form, then as a single
    word.  Counts are taken after phrase merging (before stop word removal),
    so a word target counts only occurrences NOT absorbed into a concept.
    Rows are (group, target label, count), groups sorted, targets in call
    order.
    """
    resolved = []
    for target in targets:
        toks = tuple(tokenize(str(target)))
        cid = onto.resolve(toks)
        if cid is not None:
            resolved.append(("concept", cid, " ".join(onto.concepts[cid].canonical)))
        elif len(toks) == 1:
            resolved.append(("word", toks[0], toks[0]))
        elif str(target) in onto.concepts:
            cid = str(target)
            resolved.append(("concept", cid, " ".join(onto.concepts[cid].canonical)))
        else:
            raise CorpusError(f"unknown target {target!r}")

    counts: dict[tuple[str, int], int] = {}
    groups = set()
    for d in sorted(docs, key=lambda d: d.doc_id):
        group = str(d.meta.get(group_by, ""))
        groups.add(group)
        units = match_concepts(tokenize(d.text), onto).units
        for u in units:
            for t_idx, (kind, key, _) in enumerate(resolved):
                if kind == "concept" and u.concept_id == key:
                    counts[(group, t_idx)] = counts.get((group, t_idx), 0) + 1
                elif kind == "word" and not u.is_concept and u.surface[0] == key:
                    counts[(group, t_idx)] = counts.get((group, t_idx), 0) + 1
    rows = []
    for group in sorted(groups):
        for t_idx, (_, _, label) in enumerate(resolved):
            rows.append((group, label, counts.get((group, t_idx), 0)))
    return rows


def load_corpus_dir(path) -> list[Document]:
    """Read a directory of .txt files with optional .meta.json sidecars."""
    root = Path(path)
    if not root.is_dir():
        raise CorpusError(f"corpus directory {path!r} does not exist")
    docs = []
    for txt in sorted(root.glob("*.txt")):
        meta_path = txt.with_name(txt.stem + ".meta.json")
        meta = {}
        if meta_path.exists():
            with open(meta_path, encoding="utf-8") as fh:
                meta = json.load(fh)
        docs.append(Document(txt.stem, txt.read_text("utf-8"), meta))
    return docs


def save_corpus(corpus: EncodedCorpus, path) -> None:
    """Dump an encoded corpus with a format version header."""
    vocab = corpus.vocabulary
    obj = {
        "format": CORPUS_FORMAT,
        "version": CORPUS_VERSION,
        "boost": corpus.boost,
        "vocabulary": [
            [int(e.is_concept), e.term, e.display] for e in vocab.entries
        ],
        "doc_freq": list(vocab.doc_freq),
        "docs": [[d.doc_id, d.token_ids, d.weights] for d in corpus.docs],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, separators=(",", ":"), ensure_ascii=False)
        fh.write("\n")


def load_corpus(path) -> EncodedCorpus:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("format") != CORPUS_FORMAT or obj.get("version") != CORPUS_VERSION:
        raise CorpusError(f"not a {CORPUS_FORMAT} v{CORPUS_VERSION} file: {path}")
    entries = tuple(
        VocabEntry(term, bool(flag), display)
        for flag, term, display in obj["vocabulary"]
    )
    word_index = {e.term: i for i, e in enumerate(entries) if not e.is_concept}
    concept_index = {e.term: i for i, e in enumerate(entries) if e.is_concept}
    vocab = Vocabulary(entries, word_index, concept_index, tuple(obj["doc_freq"]))
    docs = [
        EncodedDoc(doc_id, list(ids), [float(w) for w in weights])
        for doc_id, ids, weights in obj["docs"]
    ]
    return EncodedCorpus(docs, vocab, float(obj["boost"]))
