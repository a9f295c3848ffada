"""Weighted collapsed-Gibbs LDA with fold-in and perplexity evaluation.

Counts are real-valued: every increment/decrement for a token uses the
token's weight (1 for words, 1+boost for ontology concepts), so boost=0
degenerates exactly to standard integer-count LDA.  The full conditional
for token i in document d is

    p(z_i = k | z_-i) ∝ (n_dk + alpha) * (m_kw + beta) / (m_k + V*beta)

with token i's weight removed from all counts first.

Reproducibility protocol (fixed so equal (corpus, config, seed) runs give
bit-identical models):
- RNG is numpy PCG64 seeded with the config seed.
- Initialization consumes one double u per token, documents in corpus order
  (doc_id order from build_corpus) and tokens in position order; the
  initial topic is floor(K*u).
- Each sweep consumes one double per token in the same order; the new topic
  is the smallest k whose cumulative unnormalized conditional reaches
  u * total.
- Counts are rebuilt from assignments at the end of every sweep, which
  cancels float drift from weighted increments.
- phi/theta come from count snapshots averaged every `thin` sweeps counted
  back from the final sweep, restricted to sweeps after burn_in (the final
  sweep is always a snapshot).
- Fold-in of held-out document number j under perplexity() uses an RNG
  seeded with SeedSequence([seed, j]).
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from math import exp, log

import numpy as np

from .preprocess import EncodedCorpus, EncodedDoc, Vocabulary, VocabEntry

logger = logging.getLogger(__name__)

MODEL_FORMAT = "ontotopics-model"
MODEL_VERSION = 1


class LdaError(Exception):
    """Raised for invalid configs, corpora or model files."""


@dataclass
class TrainingConfig:
    """Sampler settings; alpha defaults to 50/K, guided K range is 2-6."""

    k: int = 4
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 800
    thin: int = 10
    seed: int = 0
    boost: float = 0.0

    def resolved_alpha(self) -> float:
        return 50.0 / self.k if self.alpha is None else self.alpha

    def validate(self):
        if self.k < 2:
            raise LdaError("K must be >= 2")
        if self.resolved_alpha() <= 0 or self.beta <= 0:
            raise LdaError("alpha and beta must be positive")
        if not (0 <= self.burn_in < self.iterations):
            raise LdaError("need 0 <= burn_in < iterations")
        if self.thin < 1:
            raise LdaError("thin must be >= 1")
        if self.seed < 0:
            raise LdaError("seed must be non-negative")
        if self.boost < 0:
            raise LdaError("boost must be non-negative")


@dataclass
class TopicModel:
    """Averaged Gibbs counts plus the derived phi/theta distributions."""

    k: int
    v: int
    n_dk: np.ndarray  # D x K weighted counts
    m_kw: np.ndarray  # K x V weighted counts
    m_k: np.ndarray  # K totals (row sums of m_kw)
    phi: np.ndarray  # K x V topic-term distribution
    theta: np.ndarray  # D x K document-topic distribution
    config: TrainingConfig
    vocab_hash: str
    doc_ids: tuple[str, ...]
    vocabulary: Vocabulary | None = None


@dataclass
class PerplexityResult:
    perplexity: float
    log_likelihood: float
    token_mass: float
    heldout_label: str = ""


class GibbsChain:
    """Mutable sampler state; train() drives it, tests can step it directly."""

    def __init__(self, docs, k: int, alpha: float, beta: float, v: int, seed: int):
        self.docs = [(list(d.token_ids), list(d.weights)) for d in docs]
        self.k = k
        self.alpha = alpha
        self.beta = beta
        self.v = v
        self.vbeta = v * beta
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self.n_tokens = sum(len(ids) for ids, _ in self.docs)
        self.z = [[0] * len(ids) for ids, _ in self.docs]
        self.n_dk = [[0.0] * k for _ in self.docs]
        self.m_kw = [[0.0] * v for _ in range(k)]
        self.m_k = [0.0] * k
        self._init_assignments()

    def _init_assignments(self):
        us = self.rng.random(self.n_tokens).tolist()
        pos = 0
        for d, (ids, ws) in enumerate(self.docs):
            zrow = self.z[d]
            nrow = self.n_dk[d]
            for i in range(len(ids)):
                zk = int(self.k * us[pos])
                pos += 1
                zrow[i] = zk
                wt = ws[i]
                nrow[zk] += wt
                self.m_kw[zk][ids[i]] += wt
                self.m_k[zk] += wt

    def sweep(self):
        """One full Gibbs sweep over every token, then a count rebuild."""
        k_n = self.k
        alpha = self.alpha
        beta = self.beta
        vbeta = self.vbeta
        m_kw = self.m_kw
        m_k = self.m_k
        us = self.rng.random(self.n_tokens).tolist()
        pos = 0
        cum = [0.0] * k_n
        for d, (ids, ws) in enumerate(self.docs):
            nrow = self.n_dk[d]
            zrow = self.z[d]
            for i in range(len(ids)):
                w = ids[i]
                wt = ws[i]
                zk = zrow[i]
                nrow[zk] -= wt
                m_kw[zk][w] -= wt
                m_k[zk] -= wt
                total = 0.0
                for k in range(k_n):
                    total += (nrow[k] + alpha) * (m_kw[k][w] + beta) / (m_k[k] + vbeta)
                    cum[k] = total
                u = us[pos] * total
                pos += 1
                zk = 0
                while cum[zk] < u:
                    zk += 1
                zrow[i] = zk
                nrow[zk] += wt
                m_kw[zk][w] += wt
                m_k[zk] += wt
        self.rebuild_counts()

    def rebuild_counts(self):
        """Recompute all counts from assignments (cancels float drift)."""
        k_n, v = self.k, self.v
        self.n_dk = [[0.0] * k_n for _ in self.docs]
        self.m_kw = [[0.0] * v for _ in range(k_n)]
        self.m_k = [0.0] * k_n
        for d, (ids, ws) in enumerate(self.docs):
            nrow = self.n_dk[d]
            zrow = self.z[d]
            for i in range(len(ids)):
                zk = zrow[i]
                wt = ws[i]
                nrow[zk] += wt
                self.m_kw[zk][ids[i]] += wt
                self.m_k[zk] += wt


def snapshot_sweeps(iterations: int, burn_in: int, thin: int) -> list[int]:
    """Snapshot schedule: every `thin` sweeps back from the last, after burn-in."""
    sweeps = []
    s = iterations
    while s > burn_in:
        sweeps.append(s)
        s -= thin
    sweeps.reverse()
    return sweeps


def train(corpus: EncodedCorpus, cfg: TrainingConfig) -> TopicModel:
    """Run the weighted collapsed Gibbs sampler over an encoded corpus."""
    cfg.validate()
    if not corpus.docs:
        raise LdaError("corpus has no documents")
    v = corpus.vocabulary.size
    for d in corpus.docs:
        if not d.token_ids:
            logger.warning("document %s has no tokens; theta will be uniform",
                           d.doc_id)

    chain = GibbsChain(corpus.docs, cfg.k, cfg.resolved_alpha(), cfg.beta, v,
                       cfg.seed)
    snaps = set(snapshot_sweeps(cfg.iterations, cfg.burn_in, cfg.thin))
    acc_n = np.zeros((len(corpus.docs), cfg.k))
    acc_m = np.zeros((cfg.k, v))
    n_snaps = 0
    for s in range(1, cfg.iterations + 1):
        chain.sweep()
        if s in snaps:
            acc_n += np.asarray(chain.n_dk)
            acc_m += np.asarray(chain.m_kw)
            n_snaps += 1
    n_dk = acc_n / n_snaps
    m_kw = acc_m / n_snaps
    return _finish_model(n_dk, m_kw, cfg, corpus)


def _finish_model(n_dk: np.ndarray, m_kw: np.ndarray, cfg: TrainingConfig,
                  corpus: EncodedCorpus) -> TopicModel:
    alpha = cfg.resolved_alpha()
    v = corpus.vocabulary.size
    m_k = m_kw.sum(axis=1)
    phi = (m_kw + cfg.beta) / (m_k + v * cfg.beta)[:, None]
    doc_mass = n_dk.sum(axis=1)
    theta = (n_dk + alpha) / (doc_mass + cfg.k * alpha)[:, None]
    return TopicModel(
        k=cfg.k,
        v=v,
        n_dk=n_dk,
        m_kw=m_kw,
        m_k=m_k,
        phi=phi,
        theta=theta,
        config=cfg,
        vocab_hash=corpus.vocabulary.digest(),
        doc_ids=tuple(d.doc_id for d in corpus.docs),
        vocabulary=corpus.vocabulary,
    )


def _fold_in_rng(m: TopicModel, doc: EncodedDoc, sweeps: int,
                 rng: np.random.Generator) -> np.ndarray:
    alpha = m.config.resolved_alpha()
    beta = m.config.beta
    vbeta = m.v * beta
    k_n = m.k

    ids, weights = [], []
    oov = 0
    for w, wt in zip(doc.token_ids, doc.weights):
        if 0 <= w < m.v:
            ids.append(w)
            weights.append(wt)
        else:
            oov += 1
    if oov:
        logger.warning("fold-in of %s: %d out-of-vocabulary tokens skipped",
                       doc.doc_id, oov)
    n = len(ids)
    if n == 0:
        logger.warning("fold-in of %s: no in-vocabulary tokens; uniform theta",
                       doc.doc_id)
        return np.full(k_n, 1.0 / k_n)

    # Topic-term part of the conditional is frozen, so precompute per position.
    m_kw = m.m_kw
    m_k = m.m_k
    pw = [[(m_kw[k, w] + beta) / (m_k[k] + vbeta) for k in range(k_n)] for w in ids]

    z = [0] * n
    n_k = [0.0] * k_n
    us = rng.random(n).tolist()
    for i in range(n):
        zk = int(k_n * us[i])
        z[i] = zk
        n_k[zk] += weights[i]

    burn = sweeps // 2
    acc = [0.0] * k_n
    cum = [0.0] * k_n
    for s in range(1, sweeps + 1):
        us = rng.random(n).tolist()
        for i in range(n):
            wt = weights[i]
            zk = z[i]
            n_k[zk] -= wt
            row = pw[i]
            total = 0.0
            for k in range(k_n):
                total += (n_k[k] + alpha) * row[k]
                cum[k] = total
            u = us[i] * total
            zk = 0
            while cum[zk] < u:
                zk += 1
            z[i] = zk
            n_k[zk] += wt
        if s > burn:
            for k in range(k_n):
                acc[k] += n_k[k]
    n_post = sweeps - burn
    avg = [a / n_post for a in acc]
    denom = sum(avg) + k_n * alpha
    return np.array([(a + alpha) / denom for a in avg])


def fold_in(m: TopicModel, doc: EncodedDoc, sweeps: int, seed: int = 0
            ) -> np.ndarray:
    """Estimate a held-out document's topic mixture; model counts stay frozen."""
    if sweeps < 1:
        raise LdaError("sweeps must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    return _fold_in_rng(m, doc, sweeps, rng)


def perplexity(m: TopicModel, heldout, sweeps: int, seed: int = 0,
               label: str = "") -> PerplexityResult:
    """Held-out perplexity exp(-LL / token mass) using fold-in thetas.

    Out-of-vocabulary tokens contribute neither likelihood nor mass.  Each
    document's fold-in RNG is seeded with SeedSequence([seed, doc_index]).
    """
    phi = m.phi
    total_ll = 0.0
    mass = 0.0
    for j, doc in enumerate(heldout):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, j])))
        theta = _fold_in_rng(m, doc, sweeps, rng)
        for w, wt in zip(doc.token_ids, doc.weights):
            if not (0 <= w < m.v):
                continue
            p = float(np.dot(theta, phi[:, w]))
            total_ll += wt * log(p)
            mass += wt
    if mass == 0:
        raise LdaError("held-out set has zero token mass")
    return PerplexityResult(
        perplexity=exp(-total_ll / mass),
        log_likelihood=total_ll,
        token_mass=mass,
        heldout_label=label,
    )


def top_terms(m: TopicModel, topic: int, n: int) -> list[tuple[str, float]]:
    """Top-N terms of a topic; concepts render as their full canonical phrase."""
    if not (0 <= topic < m.k):
        raise LdaError(f"topic index {topic} out of range")
    if n > m.v:
        raise LdaError(f"requested {n} terms but vocabulary has {m.v}")
    if m.vocabulary is None:
        raise LdaError("model carries no vocabulary; cannot render terms")
    probs = m.phi[topic]
    order = sorted(range(m.v), key=lambda w: (-probs[w], w))[:n]
    return [(m.vocabulary.entries[w].display, float(probs[w])) for w in order]


def save_model(m: TopicModel, path) -> None:
    """Versioned JSON dump with fixed field order (byte-stable)."""
    obj = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config": asdict(m.config),
        "vocab_hash": m.vocab_hash,
        "k": m.k,
        "v": m.v,
        "doc_ids": list(m.doc_ids),
        "vocabulary": None
        if m.vocabulary is None
        else [[int(e.is_concept), e.term, e.display] for e in m.vocabulary.entries],
        "doc_freq": None if m.vocabulary is None else list(m.vocabulary.doc_freq),
        "n_dk": m.n_dk.tolist(),
        "m_kw": m.m_kw.tolist(),
        "m_k": m.m_k.tolist(),
        "phi": m.phi.tolist(),
        "theta": m.theta.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, separators=(",", ":"), ensure_ascii=False)
        fh.write("\n")


def load_model(path) -> TopicModel:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("format") != MODEL_FORMAT or obj.get("version") != MODEL_VERSION:
        raise LdaError(f"not a {MODEL_FORMAT} v{MODEL_VERSION} file: {path}")
    vocab = None
    if obj["vocabulary"] is not None:
        entries = tuple(
            VocabEntry(term, bool(flag), display)
            for flag, term, display in obj["vocabulary"]
        )
        vocab = Vocabulary(
            entries,
            {e.term: i for i, e in enumerate(entries) if not e.is_concept},
            {e.term: i for i, e in enumerate(entries) if e.is_concept},
            tuple(obj["doc_freq"]),
        )
    return TopicModel(
        k=obj["k"],
        v=obj["v"],
        n_dk=np.array(obj["n_dk"], dtype=float).reshape(-1, obj["k"]),
        m_kw=np.array(obj["m_kw"], dtype=float).reshape(obj["k"], obj["v"]),
        m_k=np.array(obj["m_k"], dtype=float),
        phi=np.array(obj["phi"], dtype=float).reshape(obj["k"], obj["v"]),
        theta=np.array(obj["theta"], dtype=float).reshape(-1, obj["k"]),
        config=TrainingConfig(**obj["config"]),
        vocab_hash=obj["vocab_hash"],
        doc_ids=tuple(obj["doc_ids"]),
        vocabulary=vocab,
    )
