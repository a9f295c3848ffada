"""Pipeline configuration: one JSON file drives every CLI command.

Relative paths inside a config are resolved against the config file's own
directory, so fixture trees are relocatable.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


class ConfigError(Exception):
    """Bad or missing configuration."""


@dataclass
class PipelineConfig:
    glossaries: list = field(default_factory=list)
    corpus_dir: str | None = None
    ontology: str | None = None
    stoplist: str | None = None
    output_dir: str = "out"
    boost: float = 0.0
    boost_sweep: list = field(default_factory=lambda: [0.0, 0.05, 0.10, 0.25, 0.50])
    k: int = 4
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 800
    thin: int = 10
    min_df: int = 2
    seed: int = 0
    top_n: int = 10
    fold_in_sweeps: int = 200
    train_window: str = "previous"  # or "cumulative"
    mapping_threshold: float = 0.2
    has_topic_threshold: float | None = None  # None -> 1/K
    shared_concept_chapters: int = 3
    partitions: list = field(default_factory=list)  # [{"label":..., "docs":[...]}]


def default_config_json() -> str:
    return json.dumps(asdict(PipelineConfig()), indent=2)


def _resolve(base: Path, value):
    if value is None:
        return None
    p = Path(value)
    return str(p if p.is_absolute() else base / p)


def load_config(path) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: invalid JSON ({exc.msg})")
    if not isinstance(obj, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    known = {f.name for f in fields(PipelineConfig)}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ConfigError(f"config {path}: unknown keys {unknown}")
    cfg = PipelineConfig(**obj)

    base = Path(path).resolve().parent
    cfg.glossaries = [_resolve(base, g) for g in cfg.glossaries]
    cfg.corpus_dir = _resolve(base, cfg.corpus_dir)
    cfg.ontology = _resolve(base, cfg.ontology)
    cfg.stoplist = _resolve(base, cfg.stoplist)
    cfg.output_dir = _resolve(base, cfg.output_dir)

    validate_config(cfg)
    return cfg


def validate_config(cfg: PipelineConfig) -> None:
    if cfg.train_window not in ("previous", "cumulative"):
        raise ConfigError("train_window must be 'previous' or 'cumulative'")
    if cfg.boost < 0 or any(b < 0 for b in cfg.boost_sweep):
        raise ConfigError("boost values must be non-negative")
    if cfg.k < 2:
        raise ConfigError("k must be >= 2")
    if cfg.alpha is not None and cfg.alpha <= 0:
        raise ConfigError("alpha must be positive")
    if cfg.beta <= 0:
        raise ConfigError("beta must be positive")
    if not (0 <= cfg.burn_in < cfg.iterations):
        raise ConfigError("need 0 <= burn_in < iterations")
    if cfg.thin < 1 or cfg.min_df < 1 or cfg.fold_in_sweeps < 1:
        raise ConfigError("thin, min_df and fold_in_sweeps must be >= 1")
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative")
    if cfg.top_n < 0:
        raise ConfigError("top_n must be >= 0")
    if cfg.shared_concept_chapters < 1:
        raise ConfigError("shared_concept_chapters must be >= 1")

    labels = set()
    seen_docs = set()
    for part in cfg.partitions:
        if not isinstance(part, dict) or "label" not in part or "docs" not in part:
            raise ConfigError("each partition needs 'label' and 'docs'")
        if part["label"] in labels:
            raise ConfigError(f"duplicate partition label {part['label']!r}")
        labels.add(part["label"])
        for doc_id in part["docs"]:
            if doc_id in seen_docs:
                raise ConfigError(f"doc {doc_id!r} appears in two partitions")
            seen_docs.add(doc_id)
