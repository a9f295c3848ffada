"""Shared test fixtures and independent oracles.

The oracles here are deliberately written from scratch (brute-force
enumeration, an integer-count reference sampler, closed forms) so they
check the production code through a second route.
"""

from __future__ import annotations

import itertools
from math import exp, lgamma
from pathlib import Path

import numpy as np

from ontotopics import Concept, Document, Ontology, TopicModel, TrainingConfig
from ontotopics.preprocess import EncodedCorpus, EncodedDoc, Vocabulary, VocabEntry


# ---------------------------------------------------------------------------
# Exact enumeration oracle for small collapsed-LDA posteriors (unit weights).

def enumerate_marginals(docs, k, alpha, beta, v):
    """Per-position topic marginals by summing over every K^N assignment.

    Uses the collapsed joint p(z, w) with all token weights 1:
      prod_d Gamma-terms over document-topic counts
      * prod_k Gamma-terms over topic-term counts.
    """
    positions = [(d, w) for d, doc in enumerate(docs) for w in doc]
    n = len(positions)
    n_docs = len(docs)
    log_weights = []
    for z in itertools.product(range(k), repeat=n):
        n_dk = [[0] * k for _ in range(n_docs)]
        m_kw = [[0] * v for _ in range(k)]
        m_k = [0] * k
        for (d, w), zk in zip(positions, z):
            n_dk[d][zk] += 1
            m_kw[zk][w] += 1
            m_k[zk] += 1
        lp = 0.0
        for d in range(n_docs):
            lp += lgamma(k * alpha) - lgamma(sum(n_dk[d]) + k * alpha)
            for kk in range(k):
                lp += lgamma(n_dk[d][kk] + alpha) - lgamma(alpha)
        for kk in range(k):
            lp += lgamma(v * beta) - lgamma(m_k[kk] + v * beta)
            for w in range(v):
                lp += lgamma(m_kw[kk][w] + beta) - lgamma(beta)
        log_weights.append((z, lp))
    mx = max(lp for _, lp in log_weights)
    marg = np.zeros((n, k))
    total = 0.0
    for z, lp in log_weights:
        wgt = exp(lp - mx)
        total += wgt
        for pos, zk in enumerate(z):
            marg[pos, zk] += wgt
    return marg / total


# ---------------------------------------------------------------------------
# Reference integer-count collapsed Gibbs sampler (unweighted), following the
# same published draw protocol but implemented independently.

def reference_train_counts(docs, k, alpha, beta, v, seed, iterations, burn_in,
                           thin):
    """Averaged snapshot counts from an integer-count sampler."""
    rng = np.random.Generator(np.random.PCG64(seed))
    flat = [(d, w) for d, doc in enumerate(docs) for w in doc]
    n_tokens = len(flat)
    n_docs = len(docs)
    n_dk = np.zeros((n_docs, k), dtype=np.int64)
    m_kw = np.zeros((k, v), dtype=np.int64)
    m_k = np.zeros(k, dtype=np.int64)
    z = []
    us = rng.random(n_tokens)
    for idx, (d, w) in enumerate(flat):
        t = int(k * us[idx])
        z.append(t)
        n_dk[d, t] += 1
        m_kw[t, w] += 1
        m_k[t] += 1

    snaps = set()
    s = iterations
    while s > burn_in:
        snaps.add(s)
        s -= thin
    vbeta = v * beta
    acc_n = np.zeros((n_docs, k))
    acc_m = np.zeros((k, v))
    n_snaps = 0
    for sweep in range(1, iterations + 1):
        us = rng.random(n_tokens)
        for idx, (d, w) in enumerate(flat):
            t = z[idx]
            n_dk[d, t] -= 1
            m_kw[t, w] -= 1
            m_k[t] -= 1
            total = 0.0
            cum = []
            for kk in range(k):
                total += (n_dk[d, kk] + alpha) * (m_kw[kk, w] + beta) / (m_k[kk] + vbeta)
                cum.append(total)
            x = us[idx] * total
            t = 0
            while cum[t] < x:
                t += 1
            z[idx] = t
            n_dk[d, t] += 1
            m_kw[t, w] += 1
            m_k[t] += 1
        if sweep in snaps:
            acc_n += n_dk
            acc_m += m_kw
            n_snaps += 1
    return acc_n / n_snaps, acc_m / n_snaps


def reference_model(corpus: EncodedCorpus, cfg: TrainingConfig) -> TopicModel:
    """TopicModel assembled from the reference sampler's counts."""
    docs = [d.token_ids for d in corpus.docs]
    v = corpus.vocabulary.size
    alpha = cfg.resolved_alpha()
    n_dk, m_kw = reference_train_counts(
        docs, cfg.k, alpha, cfg.beta, v, cfg.seed, cfg.iterations, cfg.burn_in,
        cfg.thin)
    m_k = m_kw.sum(axis=1)
    phi = (m_kw + cfg.beta) / (m_k + v * cfg.beta)[:, None]
    mass = n_dk.sum(axis=1)
    theta = (n_dk + alpha) / (mass + cfg.k * alpha)[:, None]
    return TopicModel(k=cfg.k, v=v, n_dk=n_dk, m_kw=m_kw, m_k=m_k, phi=phi,
                      theta=theta, config=cfg,
                      vocab_hash=corpus.vocabulary.digest(),
                      doc_ids=tuple(d.doc_id for d in corpus.docs),
                      vocabulary=corpus.vocabulary)


# ---------------------------------------------------------------------------
# Hand-rolled encoded corpora for sampler tests.

def toy_corpus(doc_tokens, weights=None, boost=0.0):
    """EncodedCorpus over single-letter word ids given token lists like 'abc'."""
    terms = sorted({t for doc in doc_tokens for t in doc})
    index = {t: i for i, t in enumerate(terms)}
    entries = tuple(VocabEntry(t, False, t) for t in terms)
    vocab = Vocabulary(entries, dict(index), {}, tuple(1 for _ in terms))
    docs = []
    for j, doc in enumerate(doc_tokens):
        ids = [index[t] for t in doc]
        ws = list(weights[j]) if weights else [1.0] * len(ids)
        docs.append(EncodedDoc(f"d{j:03d}", ids, ws))
    return EncodedCorpus(docs, vocab, boost)


# ---------------------------------------------------------------------------
# Synthetic planted-topic world: multiword concepts + noisy singleton words.

FIXTURES = Path(__file__).parent / "fixtures"


class PlantedWorld:
    """A generative LDA world whose high-probability terms include phrases.

    Each planted topic owns a few multiword concepts (strong, exclusive
    signals) and a band of topic words; all topics share a pool of common
    words so that singleton words alone are weakly discriminative.
    """

    def __init__(self, n_topics=3, concepts_per_topic=4, words_per_topic=12,
                 shared_words=40, concept_mass=0.45, topic_word_mass=0.25,
                 seed=12345):
        rng = np.random.Generator(np.random.PCG64(seed))
        self.n_topics = n_topics
        self.concepts = []  # list of token tuples, per topic
        for t in range(n_topics):
            phrases = []
            for j in range(concepts_per_topic):
                length = 2 + (j % 2)
                phrases.append(tuple(f"q{t}p{j}x{i}" for i in range(length)))
            self.concepts.append(phrases)
        # one long 7-token concept on topic 0, UNFCCC-style
        self.concepts[0][-1] = tuple(f"longc{i}" for i in range(7))
        self.topic_words = [
            [f"w{t}v{i}" for i in range(words_per_topic)] for t in range(n_topics)
        ]
        self.shared = [f"s{i}" for i in range(shared_words)]

        self.term_tables = []
        for t in range(n_topics):
            terms = []
            probs = []
            n_c = len(self.concepts[t])
            for ph in self.concepts[t]:
                terms.append(ph)
                probs.append(concept_mass / n_c)
            n_w = len(self.topic_words[t])
            for w in self.topic_words[t]:
                terms.append((w,))
                probs.append(topic_word_mass / n_w)
            rest = 1.0 - concept_mass - topic_word_mass
            weights = rng.dirichlet([5.0] * len(self.shared))
            for w, p in zip(self.shared, weights):
                terms.append((w,))
                probs.append(rest * p)
            self.term_tables.append((terms, np.array(probs)))

    def ontology(self) -> Ontology:
        concepts = []
        for phrases in self.concepts:
            for ph in phrases:
                concepts.append(Concept("c:" + "_".join(ph), ph))
        return Ontology(concepts)

    def sample_documents(self, n_docs, mean_len, seed, id_prefix="doc",
                         meta_fn=None) -> list[Document]:
        rng = np.random.Generator(np.random.PCG64(seed))
        docs = []
        for j in range(n_docs):
            theta = rng.dirichlet([0.3] * self.n_topics)
            length = mean_len + int(rng.integers(-mean_len // 5, mean_len // 5 + 1))
            words = []
            for _ in range(length):
                t = int(rng.choice(self.n_topics, p=theta))
                terms, probs = self.term_tables[t]
                idx = int(rng.choice(len(terms), p=probs))
                words.extend(terms[idx])
            doc_id = f"{id_prefix}{j:03d}"
            meta = meta_fn(j) if meta_fn else {}
            docs.append(Document(doc_id, " ".join(words), meta))
        return docs


def ar_partitioned_docs(world: PlantedWorld, seed=777, mean_len=60):
    """61 documents split 11/11/14/11/14 across AR1..AR5, chapter-per-doc."""
    sizes = [11, 11, 14, 11, 14]
    docs = []
    partitions = []
    for p, size in enumerate(sizes, start=1):
        new = world.sample_documents(
            size, mean_len, seed + p, id_prefix=f"ar{p}-ch",
            meta_fn=lambda j, p=p: {"report_period": p, "book": "physical_science",
                                    "chapter_number": j + 1},
        )
        docs.extend(new)
        partitions.append({"label": f"AR{p}", "docs": [d.doc_id for d in new]})
    return docs, partitions
