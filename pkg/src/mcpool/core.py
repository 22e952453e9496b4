"""Domain types and probability primitives shared by every other module.

The central objects are :class:`Distribution` (a probability vector over the
choices of one question), :class:`ForecastSet` (the instances x modules grid
of such vectors) and :class:`WeightVector` (per-module weights for one of the
three pooling rules).  All types are immutable after construction and all
operations are pure functions, so everything here is safe to share across
threads.
"""

from __future__ import annotations

import string
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConsistencyError,
    InvalidDistributionError,
    InvalidParameterError,
    InvalidScoreError,
)

#: Tolerance on |sum(probs) - 1| before a vector is renormalized on ingestion.
PROB_SUM_TOL = 1e-9

#: Upper bound for logarithmic-rule weights (mixture/product live in [0, 1]).
LOGARITHMIC_WEIGHT_MAX = 10.0

#: Epsilon used to lift zero probabilities before logarithmic pooling.
DEFAULT_SMOOTHING_EPSILON = 1e-5

_PUNCT = string.punctuation + "‘’“”"


class Rule(str, Enum):
    """The three pooling rules."""

    MIXTURE = "mixture"
    LOGARITHMIC = "logarithmic"
    PRODUCT = "product"

    @classmethod
    def parse(cls, name: str) -> "Rule":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise InvalidParameterError(f"unknown rule {name!r}") from None


def normalize_token(token: str) -> str:
    """Case-fold a token and strip surrounding punctuation.

    No stemming happens here; solver modules that need lemmatization apply
    their own local heuristics.
    """
    return token.strip().casefold().strip(_PUNCT)


@dataclass(frozen=True)
class WordTuple:
    """One or two lowercase tokens: a synonym-question word or an analogy pair."""

    words: tuple[str, ...]

    def __post_init__(self) -> None:
        words = tuple(self.words)
        object.__setattr__(self, "words", words)
        if len(words) not in (1, 2):
            raise InvalidParameterError(
                f"word tuple must hold 1 or 2 tokens, got {len(words)}"
            )
        for w in words:
            if not w:
                raise InvalidParameterError("word tuple tokens must be non-empty")

    @classmethod
    def of(cls, *tokens: str) -> "WordTuple":
        return cls(tuple(normalize_token(t) for t in tokens))

    @property
    def arity(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


@dataclass(frozen=True)
class Instance:
    """A multiple-choice question: stem, k choices, index of the correct one."""

    id: str
    stem: WordTuple
    choices: tuple[WordTuple, ...]
    answer: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "choices", tuple(self.choices))
        if len(self.choices) < 2:
            raise InvalidParameterError(f"instance {self.id}: needs k >= 2 choices")
        if not 0 <= self.answer < len(self.choices):
            raise InvalidParameterError(
                f"instance {self.id}: answer index {self.answer} outside [0, {len(self.choices)})"
            )
        for c in self.choices:
            if c.arity != self.stem.arity:
                raise InvalidParameterError(
                    f"instance {self.id}: choice arity {c.arity} != stem arity {self.stem.arity}"
                )

    @property
    def k(self) -> int:
        return len(self.choices)


class TaskKind(str, Enum):
    SYNONYM = "synonym"
    ANALOGY = "analogy"


_ARITY_TO_TASK = {1: TaskKind.SYNONYM, 2: TaskKind.ANALOGY}


@dataclass(frozen=True)
class QuestionSet:
    """An ordered collection of instances sharing k and word arity.

    Mixed choice counts are rejected: sets with different k must be run
    separately.
    """

    instances: tuple[Instance, ...]
    task_kind: TaskKind = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        instances = tuple(self.instances)
        object.__setattr__(self, "instances", instances)
        if not instances:
            raise InvalidParameterError("question set must hold at least one instance")
        k = instances[0].k
        arity = instances[0].stem.arity
        seen: set[str] = set()
        for inst in instances:
            if inst.k != k:
                raise ConsistencyError(
                    f"instance {inst.id}: k={inst.k} differs from {k}; "
                    "run sets with different choice counts separately"
                )
            if inst.stem.arity != arity:
                raise ConsistencyError(
                    f"instance {inst.id}: word arity {inst.stem.arity} differs from {arity}"
                )
            if inst.id in seen:
                raise ConsistencyError(f"duplicate instance id {inst.id!r}")
            seen.add(inst.id)
        inferred = _ARITY_TO_TASK[arity]
        if self.task_kind is None:
            object.__setattr__(self, "task_kind", inferred)
        elif TaskKind(self.task_kind) != inferred:
            raise ConsistencyError(
                f"task kind {self.task_kind} does not match word arity {arity}"
            )
        else:
            object.__setattr__(self, "task_kind", TaskKind(self.task_kind))

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    @property
    def k(self) -> int:
        return self.instances[0].k

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(inst.id for inst in self.instances)

    def answers(self) -> np.ndarray:
        """Correct-answer indices as an int64 vector."""
        return np.array([inst.answer for inst in self.instances], dtype=np.int64)


def _as_prob_array(values: Iterable[float], context: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)  # copy: flags are edited below
    if arr.ndim != 1 or arr.size < 2:
        raise InvalidDistributionError(f"{context}: need a vector of length >= 2")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistributionError(f"{context}: non-finite entry")
    if np.any(arr < 0):
        raise InvalidDistributionError(f"{context}: negative entry")
    return arr


@dataclass(frozen=True)
class Distribution:
    """A probability vector over the k choices of one instance.

    Entries must be nonnegative and sum to one within ``PROB_SUM_TOL``.
    Vectors whose sum is merely off tolerance are renormalized with a
    warning; negative or non-finite entries are rejected outright.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_prob_array(self.probs, "distribution")
        total = arr.sum()
        if total <= 0.0:
            raise InvalidDistributionError("distribution: entries sum to zero")
        if abs(total - 1.0) > PROB_SUM_TOL:
            warnings.warn(
                f"probability vector sums to {total!r}; renormalizing",
                stacklevel=3,
            )
            arr = arr / total
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "Distribution":
        # Fast path for vectors already known to be valid (hot loops).
        self = object.__new__(cls)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)
        return self

    @classmethod
    def uniform(cls, k: int) -> "Distribution":
        return cls._trusted(np.full(k, 1.0 / k))

    @property
    def k(self) -> int:
        return self.probs.shape[0]

    def __len__(self) -> int:
        return self.k

    def __getitem__(self, j: int) -> float:
        return float(self.probs[j])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


def normalize(raw: Sequence[float] | np.ndarray) -> Distribution:
    """Scale nonnegative raw scores so they sum to one.

    An all-zero vector normalizes to uniform: a module with no evidence
    abstains rather than failing.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise InvalidScoreError("raw scores must be a vector of length >= 2")
    if not np.all(np.isfinite(arr)):
        raise InvalidScoreError("raw scores contain a non-finite entry")
    if np.any(arr < 0):
        raise InvalidScoreError("raw scores contain a negative entry")
    total = arr.sum()
    if total <= 0.0:
        return Distribution.uniform(arr.size)
    return Distribution._trusted(arr / total)


def smooth(d: Distribution, epsilon: float) -> Distribution:
    """Add ``epsilon`` to every entry and renormalize.

    Output entry j is ``(d_j + eps) / (1 + k*eps)``; strictly positive for
    eps > 0, the identity for eps == 0.  The argmax is preserved.
    """
    if epsilon < 0:
        raise InvalidParameterError("smoothing epsilon must be >= 0")
    if epsilon == 0:
        return d
    k = d.k
    return Distribution._trusted((d.probs + epsilon) / (1.0 + k * epsilon))


def smooth_array(probs: np.ndarray, epsilon: float) -> np.ndarray:
    """Vectorized :func:`smooth` over the trailing axis."""
    if epsilon < 0:
        raise InvalidParameterError("smoothing epsilon must be >= 0")
    if epsilon == 0:
        return probs
    k = probs.shape[-1]
    return (probs + epsilon) / (1.0 + k * epsilon)


def argmax_choice(d: Distribution | np.ndarray) -> int:
    """Index of the largest probability; ties break toward the lowest index."""
    probs = d.probs if isinstance(d, Distribution) else np.asarray(d)
    return int(np.argmax(probs))


@dataclass(frozen=True)
class ForecastSet:
    """The complete instances x modules grid of per-choice probabilities.

    ``probs`` has shape (m, n, k); row (h, i) is module i's distribution for
    instance h.  Rows off the sum tolerance are renormalized with a warning,
    matching :class:`Distribution` ingestion.
    """

    instance_ids: tuple[str, ...]
    module_ids: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "instance_ids", tuple(self.instance_ids))
        object.__setattr__(self, "module_ids", tuple(self.module_ids))
        if len(set(self.module_ids)) != len(self.module_ids):
            raise ConsistencyError("duplicate module ids")
        if len(set(self.instance_ids)) != len(self.instance_ids):
            raise ConsistencyError("duplicate instance ids")
        arr = np.asarray(self.probs, dtype=np.float64)
        m, n = len(self.instance_ids), len(self.module_ids)
        if arr.ndim != 3 or arr.shape[:2] != (m, n) or arr.shape[2] < 2:
            raise InvalidDistributionError(
                f"forecast grid must have shape ({m}, {n}, k>=2), got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidDistributionError("forecast grid contains a non-finite entry")
        if np.any(arr < 0):
            raise InvalidDistributionError("forecast grid contains a negative entry")
        totals = arr.sum(axis=2)
        if np.any(totals <= 0.0):
            raise InvalidDistributionError("forecast grid contains an all-zero row")
        off = np.abs(totals - 1.0) > PROB_SUM_TOL
        if np.any(off):
            warnings.warn(
                f"{int(off.sum())} forecast rows off the probability-sum tolerance; renormalizing",
                stacklevel=3,
            )
            arr = arr / totals[:, :, None]
        else:
            arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def m(self) -> int:
        return self.probs.shape[0]

    @property
    def n(self) -> int:
        return self.probs.shape[1]

    @property
    def k(self) -> int:
        return self.probs.shape[2]

    def distribution(self, h: int, i: int) -> Distribution:
        return Distribution._trusted(self.probs[h, i].copy())

    def module_index(self, module_id: str) -> int:
        try:
            return self.module_ids.index(module_id)
        except ValueError:
            raise ConsistencyError(f"unknown module id {module_id!r}") from None

    def smoothed(self, epsilon: float) -> "ForecastSet":
        """A copy with every forecast row smoothed by ``epsilon``."""
        return ForecastSet(self.instance_ids, self.module_ids,
                           smooth_array(self.probs, epsilon))

    def select_modules(self, module_ids: Sequence[str]) -> "ForecastSet":
        idx = [self.module_index(mid) for mid in module_ids]
        return ForecastSet(self.instance_ids, tuple(module_ids), self.probs[:, idx, :])

    def with_module(self, module_id: str, probs: np.ndarray) -> "ForecastSet":
        """A copy with one extra module column appended."""
        if probs.shape != (self.m, self.k):
            raise ConsistencyError(
                f"new module grid must have shape ({self.m}, {self.k}), got {probs.shape}"
            )
        stacked = np.concatenate([self.probs, probs[:, None, :]], axis=1)
        return ForecastSet(self.instance_ids, self.module_ids + (module_id,), stacked)


def weight_bounds(rule: Rule) -> tuple[float, float]:
    """Feasible [low, high] box for one weight under ``rule``."""
    if Rule(rule) is Rule.LOGARITHMIC:
        return 0.0, LOGARITHMIC_WEIGHT_MAX
    return 0.0, 1.0


@dataclass(frozen=True)
class WeightVector:
    """Per-module weights for one pooling rule, keyed by module id."""

    rule: Rule
    module_ids: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self) -> None:
        rule = Rule(self.rule)
        object.__setattr__(self, "rule", rule)
        object.__setattr__(self, "module_ids", tuple(self.module_ids))
        arr = np.asarray(self.weights, dtype=np.float64)
        if arr.ndim != 1 or arr.size != len(self.module_ids):
            raise InvalidParameterError(
                f"need one weight per module id ({len(self.module_ids)}), got shape {arr.shape}"
            )
        if len(set(self.module_ids)) != len(self.module_ids):
            raise ConsistencyError("duplicate module ids in weight vector")
        lo, hi = weight_bounds(rule)
        if not np.all(np.isfinite(arr)) or np.any(arr < lo) or np.any(arr > hi):
            raise InvalidParameterError(
                f"{rule.value} weights must lie in [{lo}, {hi}]"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightVector):
            return NotImplemented
        return (self.rule is other.rule
                and self.module_ids == other.module_ids
                and np.array_equal(self.weights, other.weights))

    def __hash__(self) -> int:
        return hash((self.rule, self.module_ids, self.weights.tobytes()))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def weight_of(self, module_id: str) -> float:
        try:
            return float(self.weights[self.module_ids.index(module_id)])
        except ValueError:
            raise ConsistencyError(f"unknown module id {module_id!r}") from None

    def aligned_to(self, module_ids: Sequence[str]) -> "WeightVector":
        """Reorder weights to match ``module_ids`` (must be a permutation)."""
        if set(module_ids) != set(self.module_ids):
            raise ConsistencyError(
                "weight vector and forecast set name different modules"
            )
        order = [self.module_ids.index(mid) for mid in module_ids]
        return WeightVector(self.rule, tuple(module_ids), self.weights[order])
