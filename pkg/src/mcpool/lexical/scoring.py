"""Stem-choice scoring functions for the synonym-task solver modules.

Each function maps a (stem, choice) word pair to a nonnegative raw score;
:mod:`mcpool.lexical.modules` normalizes the per-instance score vectors into
distributions.  A score of zero means the resource offers no evidence, so a
module that scores every choice zero abstains into the uniform distribution.
"""

from __future__ import annotations

import re

import numpy as np

from .resources import CooccurrenceTable, EmbeddingTable, SnippetStore, SynonymLists

__all__ = [
    "embedding_similarity",
    "proximity_pmi",
    "synonym_overlap",
    "connector_score",
    "SYMBOL_SEPARATORS",
    "WORD_SEPARATORS",
    "CONTEXT_KEYWORDS",
]

#: Single-character joiners counted between the two words of a pair.
SYMBOL_SEPARATORS = ("[", '"', ":", ",", "=", "/", "\\", "(", "]")

#: Word joiners counted between the two words (plus bare whitespace).
WORD_SEPARATORS = ("means", "defined", "equals", "synonym", "and")

#: Words whose mere presence in a snippet hints at a definitional source.
CONTEXT_KEYWORDS = ("dictionary", "thesaurus")


def embedding_similarity(table: EmbeddingTable, x: str, y: str) -> float:
    """Cosine of the angle between the two words' vectors, in [-1, 1].

    Both words must be present; membership is the caller's check (the module
    wrapper abstains on missing words).
    """
    vx = table.vector(x)
    vy = table.vector(y)
    return float(np.dot(vx, vy) / (np.linalg.norm(vx) * np.linalg.norm(vy)))


def proximity_pmi(table: CooccurrenceTable, stem: str, choice: str) -> float:
    """Fraction of the choice's clean windows that also contain the stem.

    "Clean" windows contain no occurrence of "not".  The ratio lies in
    [0, 1]; a choice with no clean windows scores 0 (abstention).
    """
    denom = table.unigram_without_not.get(choice, 0)
    if denom <= 0:
        return 0.0
    joint = table.pair_without_not.get(frozenset((stem, choice)), 0)
    return joint / denom


def synonym_overlap(lists: SynonymLists, stem: str, choice: str,
                    membership_points: float = 10.0,
                    shared_point: float = 1.0) -> float:
    """Overlap score between the stem's and the choice's related-word lists.

    ``membership_points`` for each direction of direct listing, plus
    ``shared_point`` per word the two lists share.
    """
    stem_list = lists.related(stem)
    choice_list = lists.related(choice)
    score = 0.0
    if choice in stem_list:
        score += membership_points
    if stem in choice_list:
        score += membership_points
    score += shared_point * len(stem_list & choice_list)
    return score


def _count(pattern: str, text: str) -> int:
    return len(re.findall(pattern, text))


def _pair_patterns(a: str, b: str) -> list[str]:
    ea, eb = re.escape(a), re.escape(b)
    patterns = [rf"\b{ea}\s+{eb}\b"]
    for sym in SYMBOL_SEPARATORS:
        patterns.append(rf"\b{ea}\s*{re.escape(sym)}\s*{eb}\b")
    for word in WORD_SEPARATORS:
        patterns.append(rf"\b{ea}\s+{word}\s+{eb}\b")
    return patterns


def connector_score(store: SnippetStore, stem: str, choice: str,
                    separator_weight: float = 1.0,
                    keyword_bonus: float = 1.0) -> float:
    """Weighted count of joined stem-choice occurrences in stored snippets.

    Counts the pair separated (in either order) by one of the symbol or word
    joiners or by bare whitespace, plus a bonus per occurrence of a context
    keyword anywhere in the pair's snippets.
    """
    snippets = store.for_pair(stem, choice)
    if not snippets:
        return 0.0
    patterns = _pair_patterns(stem, choice)
    if choice != stem:
        patterns += _pair_patterns(choice, stem)
    joins = 0
    keywords = 0
    for snippet in snippets:
        text = snippet.casefold()
        joins += sum(_count(p, text) for p in patterns)
        for kw in CONTEXT_KEYWORDS:
            keywords += _count(rf"\b{kw}\b", text)
    return separator_weight * joins + keyword_bonus * keywords
