"""Solver module construction and execution.

A solver module pairs loaded resources with a per-instance scorer.  Scorers
either return a raw nonnegative score vector (normalized here, all-zero
becoming uniform) or a ready :class:`Distribution` (the relation filters and
path/definition scorers, whose outputs are already probabilistic).

Modules are declared in an INI-style config file, one ``[module:<id>]``
section each with a ``kind`` and kind-specific resource paths; see
:func:`build_module` for the kinds.  Resource problems raise
:class:`ResourceError` during construction — scoring never fails on an
individual instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..core import (
    Distribution,
    ForecastSet,
    Instance,
    QuestionSet,
    TaskKind,
    normalize,
)
from ..errors import ConfigurationError, ConsistencyError
from . import analogy, scoring
from .resources import (
    CooccurrenceTable,
    DefinitionTable,
    EmbeddingTable,
    PhraseFrequencyTable,
    PhrasePatternSet,
    RELATION_NAMES,
    RelationDatabase,
    SnippetStore,
    SynonymLists,
    ThesaurusGraph,
    default_phrase_patterns,
)

__all__ = ["LexicalModule", "MODULE_KINDS", "build_module", "run_module",
           "run_modules"]


@dataclass(frozen=True)
class LexicalModule:
    """A named scorer bound to its resources and task kind."""

    id: str
    kind: str
    task: TaskKind
    scorer: Callable[[Instance], "np.ndarray | Distribution"]

    def score_instance(self, instance: Instance) -> Distribution:
        result = self.scorer(instance)
        if isinstance(result, Distribution):
            return result
        return normalize(result)


def run_module(module: LexicalModule, questions: QuestionSet) -> list:
    """One distribution per instance; unscorable instances come back uniform."""
    if questions.task_kind != module.task:
        raise ConsistencyError(
            f"module {module.id!r} solves {module.task.value} questions, "
            f"got a {questions.task_kind.value} set"
        )
    return [module.score_instance(inst) for inst in questions]


def run_modules(modules: Sequence[LexicalModule],
                questions: QuestionSet) -> ForecastSet:
    """Score every module on every instance and assemble the forecast grid."""
    if not modules:
        raise ConfigurationError("no modules configured")
    ids = [m.id for m in modules]
    if len(set(ids)) != len(ids):
        raise ConfigurationError("duplicate module ids in configuration")
    grid = np.empty((len(questions), len(modules), questions.k))
    for i, module in enumerate(modules):
        for h, dist in enumerate(run_module(module, questions)):
            grid[h, i, :] = dist.probs
    return ForecastSet(questions.ids, tuple(ids), grid)


def _embedding_module(module_id: str, table: EmbeddingTable) -> LexicalModule:
    def scorer(instance: Instance) -> np.ndarray:
        stem = instance.stem.words[0]
        raw = np.zeros(instance.k)
        if stem not in table:
            return raw
        for j, choice in enumerate(instance.choices):
            word = choice.words[0]
            if word in table:
                # negative cosine is anti-evidence for a synonym; clamp to
                # abstention so raw scores stay nonnegative
                raw[j] = max(scoring.embedding_similarity(table, stem, word), 0.0)
        return raw

    return LexicalModule(module_id, "embedding", TaskKind.SYNONYM, scorer)


def _proximity_module(module_id: str, table: CooccurrenceTable) -> LexicalModule:
    def scorer(instance: Instance) -> np.ndarray:
        stem = instance.stem.words[0]
        return np.array([
            scoring.proximity_pmi(table, stem, choice.words[0])
            for choice in instance.choices
        ])

    return LexicalModule(module_id, "proximity", TaskKind.SYNONYM, scorer)


def _synonym_overlap_module(module_id: str, lists: SynonymLists,
                            membership_points: float,
                            shared_point: float) -> LexicalModule:
    def scorer(instance: Instance) -> np.ndarray:
        stem = instance.stem.words[0]
        return np.array([
            scoring.synonym_overlap(lists, stem, choice.words[0],
                                    membership_points, shared_point)
            for choice in instance.choices
        ])

    return LexicalModule(module_id, "synonym-overlap", TaskKind.SYNONYM, scorer)


def _connector_module(module_id: str, store: SnippetStore,
                      separator_weight: float,
                      keyword_bonus: float) -> LexicalModule:
    def scorer(instance: Instance) -> np.ndarray:
        stem = instance.stem.words[0]
        return np.array([
            scoring.connector_score(store, stem, choice.words[0],
                                    separator_weight, keyword_bonus)
            for choice in instance.choices
        ])

    return LexicalModule(module_id, "connector", TaskKind.SYNONYM, scorer)


def _phrase_vector_module(module_id: str, patterns: PhrasePatternSet,
                          freqs: PhraseFrequencyTable) -> LexicalModule:
    def scorer(instance: Instance) -> np.ndarray:
        a, b = instance.stem.words
        stem_vec = analogy.phrase_vector(patterns, freqs, a, b)
        raw = np.zeros(instance.k)
        if not np.any(stem_vec):
            return raw
        for j, choice in enumerate(instance.choices):
            c, d = choice.words
            raw[j] = analogy.relation_similarity(
                stem_vec, analogy.phrase_vector(patterns, freqs, c, d))
        return raw

    return LexicalModule(module_id, "phrase-vectors", TaskKind.ANALOGY, scorer)


def _thesaurus_paths_module(module_id: str, graph: ThesaurusGraph,
                            max_links: int) -> LexicalModule:
    def scorer(instance: Instance) -> Distribution:
        return analogy.analogy_path_score(graph, instance, max_links)

    return LexicalModule(module_id, "thesaurus-paths", TaskKind.ANALOGY, scorer)


def _relation_module(module_id: str, db: RelationDatabase, relation: str,
                     expand: bool) -> LexicalModule:
    def scorer(instance: Instance) -> Distribution:
        return analogy.relation_filter(db, relation, instance, expand)

    return LexicalModule(module_id, "relation", TaskKind.ANALOGY, scorer)


def _definition_module(module_id: str, table: DefinitionTable) -> LexicalModule:
    def scorer(instance: Instance) -> Distribution:
        return analogy.definition_similarity(table, instance)

    return LexicalModule(module_id, "definition-similarity", TaskKind.ANALOGY,
                         scorer)


MODULE_KINDS = (
    "embedding",
    "proximity",
    "synonym-overlap",
    "connector",
    "phrase-vectors",
    "thesaurus-paths",
    "relation",
    "definition-similarity",
)


def _need(options: dict, key: str, module_id: str) -> str:
    try:
        return options[key]
    except KeyError:
        raise ConfigurationError(
            f"module {module_id!r}: missing required option {key!r}"
        ) from None


def _resolve(base_dir: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base_dir / path


def build_module(module_id: str, kind: str, options: dict,
                 base_dir: Path = Path(".")) -> LexicalModule:
    """Construct one solver module from its config section.

    ``options`` holds the section's remaining key/value pairs; relative
    resource paths resolve against ``base_dir`` (the config file's folder).
    """
    kind = kind.strip().casefold()
    if kind == "embedding":
        return _embedding_module(
            module_id, EmbeddingTable.load(_resolve(base_dir, _need(options, "vectors", module_id))))
    if kind == "proximity":
        return _proximity_module(
            module_id, CooccurrenceTable.load(_resolve(base_dir, _need(options, "cooccurrence", module_id))))
    if kind == "synonym-overlap":
        lists = SynonymLists.load(_resolve(base_dir, _need(options, "lists", module_id)))
        return _synonym_overlap_module(
            module_id, lists,
            float(options.get("membership_points", 10.0)),
            float(options.get("shared_point", 1.0)))
    if kind == "connector":
        store = SnippetStore.load(_resolve(base_dir, _need(options, "snippets", module_id)))
        return _connector_module(
            module_id, store,
            float(options.get("separator_weight", 1.0)),
            float(options.get("keyword_bonus", 1.0)))
    if kind == "phrase-vectors":
        if "patterns" in options:
            patterns = PhrasePatternSet.load(_resolve(base_dir, options["patterns"]))
        else:
            patterns = default_phrase_patterns()
        freqs = PhraseFrequencyTable.load(_resolve(base_dir, _need(options, "frequencies", module_id)))
        return _phrase_vector_module(module_id, patterns, freqs)
    if kind == "thesaurus-paths":
        graph = ThesaurusGraph.load(_resolve(base_dir, _need(options, "edges", module_id)))
        return _thesaurus_paths_module(
            module_id, graph, int(options.get("max_links", analogy.DEFAULT_MAX_LINKS)))
    if kind == "relation":
        db = RelationDatabase.load(_resolve(base_dir, _need(options, "relations", module_id)))
        relation = _need(options, "relation", module_id).strip().casefold()
        if relation not in RELATION_NAMES:
            raise ConfigurationError(
                f"module {module_id!r}: unknown relation {relation!r}"
            )
        expand = options.get("expansion", "on").strip().casefold() not in ("off", "false", "0", "no")
        return _relation_module(module_id, db, relation, expand)
    if kind == "definition-similarity":
        table = DefinitionTable.load(_resolve(base_dir, _need(options, "definitions", module_id)))
        return _definition_module(module_id, table)
    raise ConfigurationError(
        f"module {module_id!r}: unknown kind {kind!r} "
        f"(known: {', '.join(MODULE_KINDS)})"
    )
