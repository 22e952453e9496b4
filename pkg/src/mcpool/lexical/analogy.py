"""Scoring machinery for the analogy-task solver modules.

An analogy instance asks whether the choice pair C:D relates the way the
stem pair A:B does.  Four families of evidence are implemented here:

* phrase vectors — 128 log-frequency counts of short joining phrases,
  compared by cosine;
* thesaurus-graph paths — all shortest directed paths (up to three links,
  either direction) between the words of a pair, compared by shared
  features;
* relation filters — keep only choices whose pair appears under the same
  database relation as the stem pair;
* definition similarity — cosine of definition bag-of-words vectors,
  summed over the two slots.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass

import numpy as np

from ..core import Distribution, Instance, normalize
from .resources import (
    DefinitionTable,
    PhraseFrequencyTable,
    PhrasePatternSet,
    RelationDatabase,
    ThesaurusGraph,
)

__all__ = [
    "phrase_vector",
    "relation_similarity",
    "GraphPath",
    "bfs_paths",
    "path_similarity",
    "analogy_path_score",
    "relation_filter",
    "definition_similarity",
    "DEFAULT_MAX_LINKS",
    "SUFFIXES",
]

DEFAULT_MAX_LINKS = 3

#: Suffixes stripped by the relation modules' lemmatization heuristic.
SUFFIXES = ("ing", "es", "ed", "s")


def phrase_vector(patterns: PhrasePatternSet, table: PhraseFrequencyTable,
                  x: str, y: str) -> np.ndarray:
    """Log-frequency signature of the pair (x, y) across all templates.

    Component t is ``ln(1 + freq)`` of template t instantiated with the
    pair, so unseen phrases contribute exactly zero.
    """
    vec = np.zeros(len(patterns.templates))
    for t in range(len(patterns.templates)):
        freq = table.frequency(patterns.instantiate(t, x, y))
        if freq > 0.0:
            vec[t] = math.log1p(freq)
    return vec


def relation_similarity(r1: np.ndarray, r2: np.ndarray) -> float:
    """Cosine between two nonnegative signature vectors; 0 if either is zero."""
    n1 = np.linalg.norm(r1)
    n2 = np.linalg.norm(r2)
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    return float(np.dot(r1, r2) / (n1 * n2))


@dataclass(frozen=True)
class GraphPath:
    """One directed path between the two words of a pair.

    ``direction`` is "forward" (first word to second) or "backward".
    ``words`` collects every node on the path plus the gloss words of any
    gloss links, which is what path comparison shares.
    """

    direction: str
    links: tuple
    nodes: tuple
    gloss_words: frozenset = frozenset()

    @property
    def words(self) -> frozenset:
        return frozenset(self.nodes) | self.gloss_words


def _shortest_paths(graph: ThesaurusGraph, src: str, dst: str,
                    max_links: int) -> list:
    """All minimum-length edge sequences src -> dst within ``max_links``."""
    if src == dst:
        return []
    dist = {src: 0}
    preds: dict[str, list] = {}
    frontier = deque([src])
    found_depth = None
    while frontier:
        node = frontier.popleft()
        depth = dist[node]
        if found_depth is not None and depth >= found_depth:
            break
        if depth >= max_links:
            break
        for edge in graph.out_edges(node):
            nxt = edge.tail
            if nxt not in dist:
                dist[nxt] = depth + 1
                preds[nxt] = [edge]
                frontier.append(nxt)
            elif dist[nxt] == depth + 1:
                preds[nxt].append(edge)
            if nxt == dst and found_depth is None:
                found_depth = depth + 1
    if dst not in dist:
        return []
    paths: list[list] = []

    def backtrack(node: str, suffix: list) -> None:
        if node == src:
            paths.append(list(reversed(suffix)))
            return
        for edge in preds[node]:
            backtrack(edge.head, suffix + [edge])

    backtrack(dst, [])
    return paths


def _as_graph_path(edges: list, direction: str) -> GraphPath:
    nodes = (edges[0].head,) + tuple(e.tail for e in edges)
    gloss: set = set()
    for e in edges:
        gloss.update(e.gloss_words)
    return GraphPath(direction, tuple(e.kind for e in edges), nodes,
                     frozenset(gloss))


def bfs_paths(graph: ThesaurusGraph, x: str, y: str,
              max_links: int = DEFAULT_MAX_LINKS) -> tuple:
    """All shortest directed paths x->y plus all shortest y->x.

    Each direction contributes its own minimum length, both capped at
    ``max_links``.  The degenerate pair x == y yields no paths.
    """
    if x == y:
        return ()
    found = [_as_graph_path(p, "forward")
             for p in _shortest_paths(graph, x, y, max_links)]
    found += [_as_graph_path(p, "backward")
              for p in _shortest_paths(graph, y, x, max_links)]
    return tuple(sorted(found, key=lambda p: (p.direction, p.nodes, p.links)))


def path_similarity(p: GraphPath, q: GraphPath) -> float:
    """Count of shared features: link kinds, direction, words.

    Link kinds compare as multisets, direction contributes one point when
    equal, and every shared word (including gloss words) adds one.
    """
    shared_kinds = sum((Counter(p.links) & Counter(q.links)).values())
    same_direction = 1 if p.direction == q.direction else 0
    shared_words = len(p.words & q.words)
    return float(shared_kinds + same_direction + shared_words)


def analogy_path_score(graph: ThesaurusGraph, instance: Instance,
                       max_links: int = DEFAULT_MAX_LINKS) -> Distribution:
    """Score each choice by its best path match against the stem pair."""
    a, b = instance.stem.words
    stem_paths = bfs_paths(graph, a, b, max_links)
    if not stem_paths:
        return Distribution.uniform(instance.k)
    raw = np.zeros(instance.k)
    for j, choice in enumerate(instance.choices):
        c, d = choice.words
        choice_paths = bfs_paths(graph, c, d, max_links)
        if choice_paths:
            raw[j] = max(path_similarity(p, q)
                         for p in stem_paths for q in choice_paths)
    return normalize(raw)


def _variants(word: str) -> set:
    forms = {word}
    for suffix in SUFFIXES:
        if word.endswith(suffix) and len(word) > len(suffix) + 1:
            forms.add(word[: -len(suffix)])
    return forms


def _expand(db: RelationDatabase, word: str, use_synonyms: bool) -> set:
    forms = _variants(word)
    if use_synonyms:
        extra: set = set()
        for u, v in db.pairs("synonym"):
            if u in forms:
                extra.add(v)
            if v in forms:
                extra.add(u)
        forms |= extra
    return forms


def _pair_matches(db: RelationDatabase, relation: str, first: str, second: str,
                  expand: bool) -> bool:
    pairs = db.pairs(relation)
    if (first, second) in pairs:
        return True
    if not expand:
        return False
    lefts = _expand(db, first, True)
    rights = _expand(db, second, True)
    return any((u, v) in pairs for u in lefts for v in rights)


def relation_filter(db: RelationDatabase, relation: str, instance: Instance,
                    expand: bool = True) -> Distribution:
    """Eliminate choices that do not share the stem pair's relation.

    Uniform when the stem pair is not in the relation (the module has
    nothing to say) and uniform again when no choice survives; otherwise
    uniform over the surviving choices.  Matching optionally applies
    suffix-stripping and one-hop synonym expansion.
    """
    a, b = instance.stem.words
    if not _pair_matches(db, relation, a, b, expand):
        return Distribution.uniform(instance.k)
    raw = np.zeros(instance.k)
    for j, choice in enumerate(instance.choices):
        c, d = choice.words
        if _pair_matches(db, relation, c, d, expand):
            raw[j] = 1.0
    return normalize(raw)


def _cosine_counts(c1: Counter, c2: Counter) -> float:
    if not c1 or not c2:
        return 0.0
    dot = sum(c1[t] * c2[t] for t in c1.keys() & c2.keys())
    n1 = math.sqrt(sum(v * v for v in c1.values()))
    n2 = math.sqrt(sum(v * v for v in c2.values()))
    return dot / (n1 * n2)


def definition_similarity(table: DefinitionTable, instance: Instance) -> Distribution:
    """Sum of definition-vector cosines over the two analogy slots.

    A word without a definition contributes zero to its slot's cosine; if
    every choice ends up at zero the module abstains into uniform.
    """
    a, b = instance.stem.words
    vec_a = Counter(table.tokens(a))
    vec_b = Counter(table.tokens(b))
    raw = np.zeros(instance.k)
    for j, choice in enumerate(instance.choices):
        c, d = choice.words
        raw[j] = (_cosine_counts(vec_a, Counter(table.tokens(c)))
                  + _cosine_counts(vec_b, Counter(table.tokens(d))))
    return normalize(raw)
