"""Command-line pipeline: mine, train, eval, map, graph.

Every command is deterministic given (inputs, config, seed); re-runs write
byte-identical output files.  Exit codes: 0 success (including empty
results), 1 usage/config error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import glossary as gl
from .config import ConfigError, PipelineConfig, default_config_json, load_config
from .lda import LdaError, TopicModel, TrainingConfig, load_model, perplexity, save_model, top_terms, train
from .linker import build_author_graph, export_graph, link_topics, map_topics, ontology_from_documents
from .ontology import Ontology, OntologyError, load_ontology, save_ontology
from .preprocess import CorpusError, build_corpus, encode_with_vocabulary, load_corpus_dir
from .stopwords import load_stopwords

GUIDED_K_RANGE = (2, 6)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p):
    p.add_argument("--config", help="pipeline config JSON file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="override the config output path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ontotopics",
                     description="Ontology-grounded topic modeling pipeline")
    parser.add_argument("--print-config", action="store_true",
                        help="print the default config as JSON and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("mine", help="mine glossaries into an ontology file")
    _add_common(p)
    p.add_argument("glossaries", nargs="*", help="glossary text files")

    p = sub.add_parser("train", help="train a topic model over the corpus")
    _add_common(p)
    p.add_argument("--compare-bow", action="store_true",
                   help="also train a bag-of-words baseline and emit "
                        "side-by-side topic tables")

    p = sub.add_parser("eval", help="perplexity across ordered partitions")
    _add_common(p)
    p.add_argument("--train-window", choices=["previous", "cumulative"],
                   help="override the config train window")
    p.add_argument("--debug-uniform-phi", action="store_true",
                   help="replace phi with the uniform distribution (debug)")

    p = sub.add_parser("map", help="map topics between two trained models")
    _add_common(p)
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--label-a", default="a")
    p.add_argument("--label-b", default="b")

    p = sub.add_parser("graph", help="build the author citation graph")
    _add_common(p)
    return parser


def _require_config(args) -> PipelineConfig:
    if not args.config:
        raise UsageError("--config is required for this command")
    return load_config(args.config)


def _seed(args, cfg: PipelineConfig) -> int:
    return args.seed if args.seed is not None else cfg.seed


def _out_dir(args, cfg: PipelineConfig) -> Path:
    out = Path(args.out) if args.out else Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_ontology_or_empty(cfg: PipelineConfig) -> Ontology:
    if cfg.ontology and Path(cfg.ontology).exists():
        return load_ontology(cfg.ontology)
    return Ontology()


def _training_config(cfg: PipelineConfig, seed: int, boost: float) -> TrainingConfig:
    return TrainingConfig(k=cfg.k, alpha=cfg.alpha, beta=cfg.beta,
                          iterations=cfg.iterations, burn_in=cfg.burn_in,
                          thin=cfg.thin, seed=seed, boost=boost)


def _warn_k_guidance(k: int):
    lo, hi = GUIDED_K_RANGE
    if not (lo <= k <= hi):
        print(f"warning: K={k} is outside the guided range {lo}-{hi} "
              f"for small corpora", file=sys.stderr)


def _write_topic_table(model: TopicModel, path: Path, n: int):
    n = min(n, model.v)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("topic\trank\tterm\tprobability\n")
        for k in range(model.k):
            for rank, (term, prob) in enumerate(top_terms(model, k, n), 1):
                fh.write(f"{k}\t{rank}\t{term}\t{prob!r}\n")


def _term_line(model: TopicModel, k: int, n: int) -> str:
    return ", ".join(t for t, _ in top_terms(model, k, min(n, model.v)))


def cmd_mine(args) -> int:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    paths = list(args.glossaries) or list(cfg.glossaries)
    if not paths:
        raise UsageError("no glossary paths given")
    out = args.out or cfg.ontology
    if not out:
        raise UsageError("no output path given (--out or config 'ontology')")
    missing = [p for p in paths if not Path(p).exists()]
    if missing:
        raise UsageError(f"glossary file not found: {missing[0]}")
    stoplist = load_stopwords(cfg.stoplist)

    all_concepts = []
    n_diags = 0
    for p in paths:
        text = Path(p).read_text("utf-8")
        entries, diags = gl.parse_glossary(text)
        concepts, diags2 = gl.entries_to_concepts(entries, source=Path(p).name,
                                                  stoplist=stoplist)
        for d in diags + diags2:
            print(f"{p}: {d}", file=sys.stderr)
            n_diags += 1
        all_concepts.extend(concepts)
    merged = gl.merge_concepts(all_concepts)
    save_ontology(Ontology(merged), out)
    print(f"mined {len(merged)} concepts from {len(paths)} glossary file(s), "
          f"{n_diags} diagnostic(s) -> {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _require_config(args)
    seed = _seed(args, cfg)
    out = _out_dir(args, cfg)
    if not cfg.corpus_dir:
        raise ConfigError("config needs 'corpus_dir' for train")
    _warn_k_guidance(cfg.k)

    onto = _load_ontology_or_empty(cfg)
    docs = load_corpus_dir(cfg.corpus_dir)
    stoplist = load_stopwords(cfg.stoplist)

    corpus = build_corpus(docs, onto, boost=cfg.boost, min_df=cfg.min_df,
                          stoplist=stoplist)
    model = train(corpus, _training_config(cfg, seed, cfg.boost))
    save_model(model, out / "model.json")
    _write_topic_table(model, out / "topics.tsv", cfg.top_n)
    print(f"trained K={cfg.k} boost={cfg.boost} on {len(corpus.docs)} docs, "
          f"V={model.v} -> {out / 'model.json'}")

    if args.compare_bow:
        # Baseline per the comparison protocol: same documents and stop
        # word removal, no concept grounding (no phrases, no weighting).
        bow_corpus = build_corpus(docs, Ontology(), boost=0.0,
                                  min_df=cfg.min_df, stoplist=stoplist)
        bow_model = train(bow_corpus, _training_config(cfg, seed, 0.0))
        save_model(bow_model, out / "model_bow.json")
        _write_topic_table(bow_model, out / "topics_bow.tsv", cfg.top_n)
        with open(out / "topics_compare.txt", "w", encoding="utf-8") as fh:
            fh.write("topic\tbag_of_words\tontology_phrases\n")
            for k in range(cfg.k):
                fh.write(f"{k}\t{_term_line(bow_model, k, cfg.top_n)}\t"
                         f"{_term_line(model, k, cfg.top_n)}\n")
        print(f"baseline comparison written -> {out / 'topics_compare.txt'}")
    return 0


def cmd_eval(args) -> int:
    cfg = _require_config(args)
    if args.train_window:
        cfg.train_window = args.train_window
    seed = _seed(args, cfg)
    out = _out_dir(args, cfg)
    if not cfg.corpus_dir:
        raise ConfigError("config needs 'corpus_dir' for eval")
    if len(cfg.partitions) < 2:
        raise ConfigError("eval needs at least 2 partitions")
    _warn_k_guidance(cfg.k)

    onto = _load_ontology_or_empty(cfg)
    docs = {d.doc_id: d for d in load_corpus_dir(cfg.corpus_dir)}
    stoplist = load_stopwords(cfg.stoplist)
    for part in cfg.partitions:
        missing = [i for i in part["docs"] if i not in docs]
        if missing:
            raise ConfigError(f"partition {part['label']!r}: unknown doc "
                              f"{missing[0]!r}")

    rows, ref_rows = [], []
    parts = cfg.partitions
    for t in range(1, len(parts)):
        window = parts[:t] if cfg.train_window == "cumulative" else [parts[t - 1]]
        train_docs = [docs[i] for p in window for i in p["docs"]]
        heldout_docs = [docs[i] for i in parts[t]["docs"]]
        train_label = "+".join(p["label"] for p in window)
        for boost in cfg.boost_sweep:
            corpus = build_corpus(train_docs, onto, boost=boost,
                                  min_df=cfg.min_df, stoplist=stoplist)
            model = train(corpus, _training_config(cfg, seed, boost))
            if args.debug_uniform_phi:
                model.phi = np.full_like(model.phi, 1.0 / model.v)
            heldout_enc, _ = encode_with_vocabulary(
                heldout_docs, onto, corpus.vocabulary, boost, stoplist)
            res = perplexity(model, heldout_enc, cfg.fold_in_sweeps, seed,
                             label=parts[t]["label"])
            rows.append((res.heldout_label, cfg.k, boost, res.perplexity))
            ref = perplexity(model, corpus.docs, cfg.fold_in_sweeps, seed,
                             label=train_label)
            ref_rows.append((ref.heldout_label, cfg.k, boost, ref.perplexity))

    for name, table in (("perplexity.tsv", rows),
                        ("perplexity_train_ref.tsv", ref_rows)):
        with open(out / name, "w", encoding="utf-8") as fh:
            fh.write("heldout_label\tk\tboost\tperplexity\n")
            for label, k, boost, perp in table:
                fh.write(f"{label}\t{k}\t{boost!r}\t{perp!r}\n")
    print(f"evaluated {len(rows)} split/boost combinations -> "
          f"{out / 'perplexity.tsv'}")
    return 0


def cmd_map(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    if not cfg.ontology:
        raise ConfigError("config needs 'ontology' for map")
    onto = load_ontology(cfg.ontology)
    model_a = load_model(args.model_a)
    model_b = load_model(args.model_b)

    onto = link_topics(onto, model_a, args.label_a, cfg.top_n,
                       cfg.has_topic_threshold)
    onto = link_topics(onto, model_b, args.label_b, cfg.top_n,
                       cfg.has_topic_threshold)
    records, onto = map_topics(onto, args.label_a, args.label_b, cfg.top_n,
                               cfg.mapping_threshold)
    save_ontology(onto, out / "ontology_mapped.jsonl")
    with open(out / "mappings.tsv", "w", encoding="utf-8") as fh:
        fh.write("domain_a\ttopic_a\tdomain_b\ttopic_b\tscore\tshared_concepts\n")
        for r in records:
            fh.write(f"{r.topic_a[0]}\t{r.topic_a[1]}\t{r.topic_b[0]}\t"
                     f"{r.topic_b[1]}\t{r.score!r}\t"
                     f"{';'.join(r.shared_concepts)}\n")
    print(f"mapped {len(records)} topic pair(s) -> {out / 'mappings.tsv'}")
    return 0


def cmd_graph(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    if not cfg.corpus_dir:
        raise ConfigError("config needs 'corpus_dir' for graph")
    docs = load_corpus_dir(cfg.corpus_dir)
    base = _load_ontology_or_empty(cfg)
    onto = ontology_from_documents(docs, base)
    g = build_author_graph(onto, cfg.shared_concept_chapters)
    export_graph(g, out / "authors")
    print(f"author graph: {len(g.nodes)} node(s), {len(g.edges)} edge(s) -> "
          f"{out / 'authors.edges.tsv'}")
    return 0


_COMMANDS = {
    "mine": cmd_mine,
    "train": cmd_train,
    "eval": cmd_eval,
    "map": cmd_map,
    "graph": cmd_graph,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.print_config:
            print(default_config_json())
            return 0
        if not args.command:
            parser.print_help()
            return 1
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse -h
        return int(exc.code or 0)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OntologyError, CorpusError, LdaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
