"""Offline lexical solver modules for synonym and analogy questions."""

from .analogy import (
    analogy_path_score,
    bfs_paths,
    definition_similarity,
    GraphPath,
    path_similarity,
    phrase_vector,
    relation_filter,
    relation_similarity,
)
from .modules import (
    LexicalModule,
    MODULE_KINDS,
    build_module,
    run_module,
    run_modules,
)
from .resources import (
    CooccurrenceTable,
    DefinitionTable,
    EmbeddingTable,
    LINK_KINDS,
    PhraseFrequencyTable,
    PhrasePatternSet,
    RELATION_NAMES,
    RelationDatabase,
    SnippetStore,
    SynonymLists,
    ThesaurusEdge,
    ThesaurusGraph,
    default_phrase_patterns,
)
from .scoring import (
    connector_score,
    embedding_similarity,
    proximity_pmi,
    synonym_overlap,
)

__all__ = [
    "analogy_path_score",
    "bfs_paths",
    "build_module",
    "connector_score",
    "CooccurrenceTable",
    "DefinitionTable",
    "definition_similarity",
    "EmbeddingTable",
    "embedding_similarity",
    "GraphPath",
    "LexicalModule",
    "LINK_KINDS",
    "MODULE_KINDS",
    "path_similarity",
    "PhraseFrequencyTable",
    "PhrasePatternSet",
    "phrase_vector",
    "proximity_pmi",
    "RELATION_NAMES",
    "RelationDatabase",
    "relation_filter",
    "relation_similarity",
    "run_module",
    "run_modules",
    "SnippetStore",
    "SynonymLists",
    "synonym_overlap",
    "ThesaurusEdge",
    "ThesaurusGraph",
    "default_phrase_patterns",
]
