"""Lexical resource tables and their file loaders.

Every solver module reads from one of these immutable tables.  All files are
UTF-8 and tab-separated unless a format note says otherwise; loaders raise
:class:`ResourceError` with the failing path, so that a bad file surfaces at
load time rather than while scoring some instance.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..core import normalize_token
from ..errors import ResourceError

__all__ = [
    "CooccurrenceTable",
    "SynonymLists",
    "SnippetStore",
    "EmbeddingTable",
    "PhrasePatternSet",
    "PhraseFrequencyTable",
    "ThesaurusGraph",
    "ThesaurusEdge",
    "RelationDatabase",
    "DefinitionTable",
    "LINK_KINDS",
    "RELATION_NAMES",
    "default_phrase_patterns",
]

LINK_KINDS = ("hypernym", "hyponym", "synonym", "antonym", "stem", "gloss")

RELATION_NAMES = (
    "synonym",
    "antonym",
    "hypernym",
    "hyponym",
    "meronym:substance",
    "meronym:part",
    "meronym:member",
    "holonym:substance",
    "holonym:member",
)

PATTERN_COUNT = 128


def _read_lines(path: Path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ResourceError(f"cannot read resource file {path}: {exc}") from exc
    return [line.rstrip("\n") for line in text.splitlines()]


def _fields(line: str, path: Path, lineno: int, minimum: int) -> list[str]:
    parts = line.split("\t")
    if len(parts) < minimum:
        raise ResourceError(
            f"{path}:{lineno}: expected at least {minimum} tab-separated fields"
        )
    return parts


def _data_lines(path: Path) -> Iterable[tuple[int, str]]:
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


@dataclass(frozen=True)
class CooccurrenceTable:
    """Sliding-window co-occurrence counts over a local corpus.

    ``pair_without_not`` counts windows that contain both tokens and no
    occurrence of the token "not"; the matching unigram variant supplies the
    denominator of the proximity score.
    """

    window_size: int
    total_windows: int
    unigram: Mapping[str, int]
    unigram_without_not: Mapping[str, int]
    pair: Mapping[frozenset, int]
    pair_without_not: Mapping[frozenset, int]

    def __post_init__(self) -> None:
        if self.window_size < 2:
            raise ResourceError("co-occurrence window must span at least 2 tokens")
        for key, count in self.pair.items():
            bound = min((self.unigram.get(tok, 0) for tok in key), default=0)
            if count > bound or count < 0:
                raise ResourceError(
                    f"pair count for {sorted(key)} exceeds its unigram counts"
                )
        for table in (self.unigram, self.unigram_without_not, self.pair_without_not):
            if any(v < 0 for v in table.values()):
                raise ResourceError("co-occurrence counts must be nonnegative")

    @classmethod
    def from_corpus(cls, tokens: Sequence[str], window_size: int = 10
                    ) -> "CooccurrenceTable":
        """Count sliding windows of ``window_size`` tokens over a token list."""
        toks = [normalize_token(t) for t in tokens]
        toks = [t for t in toks if t]
        if not toks:
            raise ResourceError("empty corpus")
        span = min(window_size, len(toks))
        unigram: Counter = Counter()
        unigram_wo: Counter = Counter()
        pair: Counter = Counter()
        pair_wo: Counter = Counter()
        starts = range(len(toks) - span + 1)
        for s in starts:
            window = set(toks[s:s + span])
            clean = "not" not in window
            for tok in window:
                unigram[tok] += 1
                if clean:
                    unigram_wo[tok] += 1
            window_list = sorted(window)
            for a_i in range(len(window_list)):
                for b_i in range(a_i + 1, len(window_list)):
                    key = frozenset((window_list[a_i], window_list[b_i]))
                    pair[key] += 1
                    if clean:
                        pair_wo[key] += 1
        return cls(window_size, len(starts), dict(unigram), dict(unigram_wo),
                   dict(pair), dict(pair_wo))

    @classmethod
    def load(cls, path: Path) -> "CooccurrenceTable":
        """Read the tabular form (``windows``/``unigram``/``pair`` records)."""
        window_size = total = None
        unigram: dict[str, int] = {}
        unigram_wo: dict[str, int] = {}
        pair: dict[frozenset, int] = {}
        pair_wo: dict[frozenset, int] = {}
        for lineno, line in _data_lines(path):
            parts = _fields(line, path, lineno, 3)
            kind = parts[0]
            try:
                if kind == "windows":
                    window_size, total = int(parts[1]), int(parts[2])
                elif kind == "unigram":
                    tok = normalize_token(parts[1])
                    unigram[tok] = int(parts[2])
                    unigram_wo[tok] = int(parts[3]) if len(parts) > 3 else int(parts[2])
                elif kind == "pair":
                    if len(parts) < 4:
                        raise ValueError("pair record needs two tokens and a count")
                    key = frozenset((normalize_token(parts[1]), normalize_token(parts[2])))
                    pair[key] = int(parts[3])
                    pair_wo[key] = int(parts[4]) if len(parts) > 4 else int(parts[3])
                else:
                    raise ValueError(f"unknown record kind {kind!r}")
            except ValueError as exc:
                raise ResourceError(f"{path}:{lineno}: {exc}") from exc
        if window_size is None or total is None:
            raise ResourceError(f"{path}: missing 'windows' header record")
        return cls(window_size, total, unigram, unigram_wo, pair, pair_wo)


@dataclass(frozen=True)
class SynonymLists:
    """Per-headword related-word sets, merged across thesaurus fields."""

    lists: Mapping[str, frozenset]

    def related(self, word: str) -> frozenset:
        return self.lists.get(word, frozenset())

    @classmethod
    def load(cls, path: Path) -> "SynonymLists":
        merged: dict[str, set] = defaultdict(set)
        for lineno, line in _data_lines(path):
            parts = _fields(line, path, lineno, 2)
            head = normalize_token(parts[0])
            members = {normalize_token(w) for w in parts[1:] if normalize_token(w)}
            members.discard(head)
            merged[head] |= members
        return cls({head: frozenset(words) for head, words in merged.items()})


@dataclass(frozen=True)
class SnippetStore:
    """Stored text snippets keyed by unordered word pair."""

    snippets: Mapping[frozenset, tuple]

    def for_pair(self, a: str, b: str) -> tuple:
        return self.snippets.get(frozenset((a, b)), ())

    @classmethod
    def load(cls, path: Path) -> "SnippetStore":
        store: dict[frozenset, list] = defaultdict(list)
        for lineno, line in _data_lines(path):
            parts = _fields(line, path, lineno, 3)
            key = frozenset((normalize_token(parts[0]), normalize_token(parts[1])))
            store[key].append("\t".join(parts[2:]))
        return cls({k: tuple(v) for k, v in store.items()})


@dataclass(frozen=True)
class EmbeddingTable:
    """Fixed-dimension real vectors per word.

    File note: lines are ``word v1 v2 ...`` separated by spaces, not tabs.
    """

    vectors: Mapping[str, np.ndarray]
    dimension: int

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[word]

    @classmethod
    def load(cls, path: Path) -> "EmbeddingTable":
        vectors: dict[str, np.ndarray] = {}
        dim = None
        for lineno, line in _data_lines(path):
            parts = line.split()
            if len(parts) < 2:
                raise ResourceError(f"{path}:{lineno}: need a word and its components")
            word = normalize_token(parts[0])
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ResourceError(f"{path}:{lineno}: bad component: {exc}") from exc
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ResourceError(
                    f"{path}:{lineno}: dimension {vec.size} != {dim}"
                )
            if not np.any(vec):
                raise ResourceError(f"{path}:{lineno}: zero vector for {word!r}")
            vec.setflags(write=False)
            vectors[word] = vec
        if not vectors:
            raise ResourceError(f"{path}: no vectors found")
        return cls(vectors, dim)


@dataclass(frozen=True)
class PhrasePatternSet:
    """The 128 two-slot join templates used to fingerprint a word pair.

    Each template contains the placeholder ``X`` exactly once and ``Y``
    exactly once; the second half of the default file repeats the first half
    with the slots swapped.
    """

    templates: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "templates", tuple(self.templates))
        if len(self.templates) != PATTERN_COUNT:
            raise ResourceError(
                f"pattern set needs exactly {PATTERN_COUNT} templates, "
                f"got {len(self.templates)}"
            )
        for t in self.templates:
            if t.count("X") != 1 or t.count("Y") != 1:
                raise ResourceError(
                    f"template {t!r} must contain X and Y exactly once"
                )

    def instantiate(self, index: int, x: str, y: str) -> str:
        return self.templates[index].replace("X", x).replace("Y", y)

    @classmethod
    def load(cls, path: Path) -> "PhrasePatternSet":
        templates = [line.strip() for _, line in _data_lines(path)]
        return cls(tuple(templates))


@dataclass(frozen=True)
class PhraseFrequencyTable:
    """Raw phrase occurrence counts (``phrase<TAB>count`` lines)."""

    counts: Mapping[str, float]

    def frequency(self, phrase: str) -> float:
        return self.counts.get(phrase, 0.0)

    @classmethod
    def load(cls, path: Path) -> "PhraseFrequencyTable":
        counts: dict[str, float] = {}
        for lineno, line in _data_lines(path):
            parts = _fields(line, path, lineno, 2)
            try:
                value = float(parts[1])
            except ValueError as exc:
                raise ResourceError(f"{path}:{lineno}: bad count: {exc}") from exc
            if value < 0:
                raise ResourceError(f"{path}:{lineno}: negative count")
            counts[parts[0].strip().casefold()] = value
        return cls(counts)


def default_phrase_patterns() -> PhrasePatternSet:
    """The pattern set shipped with the package."""
    ref = importlib_resources.files("mcpool").joinpath("data/phrase_patterns.txt")
    templates = [
        line.strip()
        for line in ref.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    ]
    return PhrasePatternSet(tuple(templates))


@dataclass(frozen=True)
class ThesaurusEdge:
    """One directed link; gloss edges carry the defining words."""

    head: str
    kind: str
    tail: str
    gloss_words: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gloss_words", tuple(self.gloss_words))
        if self.kind not in LINK_KINDS:
            raise ResourceError(f"unknown link kind {self.kind!r}")
        if self.head == self.tail:
            raise ResourceError(f"self-loop on {self.head!r}")
        if self.gloss_words and self.kind != "gloss":
            raise ResourceError(
                f"{self.kind} edge {self.head}->{self.tail} cannot carry gloss words"
            )


@dataclass(frozen=True)
class ThesaurusGraph:
    """Directed word graph with six typed link kinds."""

    edges: tuple
    adjacency: Mapping[str, tuple] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(self.edges))
        adjacency: dict[str, list] = defaultdict(list)
        for edge in self.edges:
            adjacency[edge.head].append(edge)
        object.__setattr__(
            self, "adjacency", {h: tuple(es) for h, es in adjacency.items()}
        )

    def out_edges(self, word: str) -> tuple:
        return self.adjacency.get(word, ())

    @property
    def nodes(self) -> frozenset:
        found = set()
        for e in self.edges:
            found.add(e.head)
            found.add(e.tail)
        return frozenset(found)

    @classmethod
    def load(cls, path: Path) -> "ThesaurusGraph":
        edges = []
        for lineno, line in _data_lines(path):
            parts = _fields(line, path, lineno, 3)
            head = normalize_token(parts[0])
            kind = parts[1].strip().casefold()
            tail = normalize_token(parts[2])
            gloss: tuple = ()
            if len(parts) > 3:
                if kind != "gloss":
                    raise ResourceError(
                        f"{path}:{lineno}: extra fields on a non-gloss edge"
                    )
                gloss = tuple(
                    normalize_token(w)
                    for chunk in parts[3:]
                    for w in chunk.split()
                    if normalize_token(w)
                )
            try:
                edges.append(ThesaurusEdge(head, kind, tail, gloss))
            except ResourceError as exc:
                raise ResourceError(f"{path}:{lineno}: {exc}") from exc
        return cls(tuple(edges))


@dataclass(frozen=True)
class RelationDatabase:
    """Ordered word pairs for each of the nine tested relations."""

    relations: Mapping[str, frozenset]

    def __post_init__(self) -> None:
        table = {name: frozenset() for name in RELATION_NAMES}
        for name, pairs in self.relations.items():
            if name not in RELATION_NAMES:
                raise ResourceError(f"unknown relation {name!r}")
            table[name] = frozenset(tuple(p) for p in pairs)
        object.__setattr__(self, "relations", table)

    def pairs(self, relation: str) -> frozenset:
        if relation not in RELATION_NAMES:
            raise ResourceError(f"unknown relation {relation!r}")
        return self.relations[relation]

    @classmethod
    def load(cls, path: Path) -> "RelationDatabase":
        table: dict[str, set] = defaultdict(set)
        for lineno, line in _data_lines(path):
            parts = _fields(line, path, lineno, 3)
            name = parts[0].strip().casefold()
            if name not in RELATION_NAMES:
                raise ResourceError(f"{path}:{lineno}: unknown relation {name!r}")
            table[name].add((normalize_token(parts[1]), normalize_token(parts[2])))
        return cls({name: frozenset(pairs) for name, pairs in table.items()})


@dataclass(frozen=True)
class DefinitionTable:
    """Case-folded definition token lists, one table per dictionary source."""

    definitions: Mapping[str, tuple]

    def tokens(self, word: str) -> tuple:
        return self.definitions.get(word, ())

    @classmethod
    def load(cls, path: Path) -> "DefinitionTable":
        table: dict[str, tuple] = {}
        for lineno, line in _data_lines(path):
            parts = _fields(line, path, lineno, 2)
            word = normalize_token(parts[0])
            toks = tuple(
                normalize_token(t)
                for chunk in parts[1:]
                for t in chunk.split()
                if normalize_token(t)
            )
            table[word] = table.get(word, ()) + toks
        return cls(table)
