"""Ontology-grounded topic modeling toolkit.

Mines multiword domain concepts from glossaries into a typed ontology,
merges and weights those concepts during corpus preprocessing, trains
weighted collapsed-Gibbs LDA, evaluates by held-out perplexity, and links
topics, documents and citation-derived author networks back into the
ontology.
"""

from .glossary import (
    GlossaryEntry,
    RecallReport,
    entries_to_concepts,
    extract_ngrams,
    merge_concepts,
    parse_glossary,
    recall_against,
)
from .lda import (
    GibbsChain,
    LdaError,
    PerplexityResult,
    TopicModel,
    TrainingConfig,
    fold_in,
    load_model,
    perplexity,
    save_model,
    top_terms,
    train,
)
from .linker import (
    AuthorGraph,
    GraphEdge,
    TopicMappingRecord,
    build_author_graph,
    export_graph,
    import_graph,
    link_topics,
    map_topics,
    ontology_from_documents,
)
from .ontology import (
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
from .preprocess import (
    CorpusError,
    Document,
    EncodedCorpus,
    EncodedDoc,
    TokenStream,
    Unit,
    Vocabulary,
    build_corpus,
    concept_frequency_report,
    encode_with_vocabulary,
    load_corpus,
    load_corpus_dir,
    match_concepts,
    remove_stopwords,
    save_corpus,
    tokenize,
)
from .stopwords import DEFAULT_STOPWORDS, load_stopwords

__version__ = "0.1.0"
