"""Glossary mining: semi-structured glossary text -> ontology concepts.

Input convention: each term on its own line with an optional trailing
parenthesized acronym, optional indented definition lines below it, entries
separated by blank lines (a run of term lines without blanks also works).
Parsing is total — bad lines are skipped and reported as diagnostics, never
raised.

Also provides a deliberately plain bigram/trigram extractor used only as a
recall-comparison baseline against the glossary route.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .ontology import Concept
from .preprocess import tokenize
from .stopwords import DEFAULT_STOPWORDS

# Trailing "(GCM)"-style token: 2-10 non-space chars; the >=2 uppercase
# check below keeps parenthetical asides out.
_ACRONYM_RE = re.compile(r"\((\S{2,10})\)\s*$")


@dataclass
class GlossaryEntry:
    term_surface: str
    acronym: str | None = None
    definition: str | None = None


@dataclass
class RecallReport:
    """How many reference concepts an extractor recovered exactly."""

    seeded: int
    recovered: int
    recall: float | None  # None when seeded == 0
    missed: list[tuple[str, ...]]


def parse_glossary(text: str) -> tuple[list[GlossaryEntry], list[str]]:
    """Parse glossary text; returns (entries, diagnostics)."""
    entries: list[GlossaryEntry] = []
    diagnostics: list[str] = []
    current: GlossaryEntry | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            current = None
            continue
        if raw[:1].isspace():
            if current is None:
                diagnostics.append(
                    f"line {lineno}: definition line with no preceding term, skipped"
                )
                continue
            frag = raw.strip()
            current.definition = (
                frag if current.definition is None else current.definition + " " + frag
            )
            continue
        term = raw.strip()
        acronym = None
        m = _ACRONYM_RE.search(term)
        if m and sum(ch.isupper() for ch in m.group(1)) >= 2:
            acronym = m.group(1)
            term = term[: m.start()].strip()
        if not term:
            diagnostics.append(f"line {lineno}: empty term, skipped")
            current = None
            continue
        current = GlossaryEntry(term_surface=term, acronym=acronym)
        entries.append(current)
    return entries, diagnostics


def entries_to_concepts(entries, source: str, stoplist=None
                        ) -> tuple[list[Concept], list[str]]:
    """Normalize entries into Concept records, merging duplicate canonicals.

    Acronyms are lowercased single tokens; an acronym that normalizes to a
    stop word or to several tokens is dropped with a diagnostic, as is an
    entry whose term normalizes to zero tokens.
    """
    stoplist = DEFAULT_STOPWORDS if stoplist is None else stoplist
    diagnostics: list[str] = []
    merged: dict[tuple[str, ...], set[str]] = {}
    for e in entries:
        canonical = tuple(tokenize(e.term_surface))
        if not canonical:
            diagnostics.append(
                f"term {e.term_surface!r} normalizes to zero tokens, dropped"
            )
            continue
        acronyms = merged.setdefault(canonical, set())
        if e.acronym:
            toks = tokenize(e.acronym)
            if len(toks) != 1:
                diagnostics.append(
                    f"acronym {e.acronym!r} does not normalize to one token, dropped"
                )
            elif toks[0] in stoplist:
                diagnostics.append(
                    f"acronym {e.acronym!r} equals a stop word, dropped"
                )
            else:
                acronyms.add(toks[0])
    concepts = [
        Concept(
            id="c:" + "_".join(canonical),
            canonical=canonical,
            acronyms=tuple(sorted(acronyms)),
            source=source,
        )
        for canonical in merged
    ]
    concepts.sort(key=lambda c: c.id)
    return concepts, diagnostics


def merge_concepts(concepts) -> list[Concept]:
    """Merge concepts with equal canonicals (e.g. from several glossaries)."""
    merged: dict[tuple[str, ...], Concept] = {}
    for c in concepts:
        prev = merged.get(c.canonical)
        if prev is None:
            merged[c.canonical] = c
        else:
            merged[c.canonical] = Concept(
                id=prev.id,
                canonical=prev.canonical,
                acronyms=tuple(sorted(set(prev.acronyms) | set(c.acronyms))),
                aliases=tuple(dict.fromkeys(prev.aliases + c.aliases)),
                source=prev.source,
            )
    return sorted(merged.values(), key=lambda c: c.id)


def extract_ngrams(corpus, n_range=(2, 3), min_count: int = 1, stoplist=None,
                   filter_boundaries: bool = True) -> list[tuple[str, ...]]:
    """Frequent bigrams/trigrams from raw texts — the comparison baseline.

    An n-gram beginning or ending with a stop word is excluded unless
    filter_boundaries is off (off reproduces the noisy behaviour of naive
    extractors, e.g. phrases starting with "the").  Sorted by frequency
    descending, then lexicographically.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    stoplist = DEFAULT_STOPWORDS if stoplist is None else stoplist
    counts: Counter = Counter()
    for text in corpus:
        toks = tokenize(text)
        for n in sorted(set(n_range)):
            for i in range(len(toks) - n + 1):
                counts[tuple(toks[i : i + n])] += 1
    out = []
    for ngram, freq in counts.items():
        if freq < min_count:
            continue
        if filter_boundaries and (ngram[0] in stoplist or ngram[-1] in stoplist):
            continue
        out.append((ngram, freq))
    out.sort(key=lambda item: (-item[1], item[0]))
    return [ngram for ngram, _ in out]


def recall_against(reference, extracted) -> RecallReport:
    """Exact-match recall of reference canonicals within extracted n-grams."""
    extracted_set = {tuple(ng) for ng in extracted}
    recovered = 0
    missed = []
    for c in reference:
        if c.canonical in extracted_set:
            recovered += 1
        else:
            missed.append(c.canonical)
    missed.sort()
    seeded = len(reference)
    recall = recovered / seeded if seeded > 0 else None
    return RecallReport(seeded=seeded, recovered=recovered, recall=recall,
                        missed=missed)
