"""Synthetic forecast generation with controllable calibration.

The generator draws, per instance, a uniform correct answer and, per module,
a guess that hits the answer with the module's accuracy ``a`` (otherwise a
uniform wrong choice).  In ``calibrated`` mode the emitted distribution puts
``a`` on the guess and ``(1 - a) / (k - 1)`` on the rest, so a stated
probability of ``a`` is correct exactly ``a`` of the time and module outputs
are independent given the answer.  In ``one_hot`` mode the module emits all
of its mass on the guess — deliberately uncalibrated, which is what weight
training has to repair.

Because the model is fully known, the exact Bayes posterior over answers
given the module guesses is computable by direct enumeration; it doubles as
an oracle for the product rule at unit weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import ForecastSet, Distribution, Instance, QuestionSet, WordTuple
from .errors import InvalidParameterError

__all__ = [
    "GeneratorMode",
    "GenerativeSpec",
    "SyntheticDataset",
    "gen_calibrated_independent",
    "bayes_posterior",
    "duplicate_module",
    "as_question_set",
]


class GeneratorMode(str, Enum):
    CALIBRATED = "calibrated"
    ONE_HOT = "one_hot"


@dataclass(frozen=True)
class GenerativeSpec:
    """Parameters of one synthetic draw; identical specs give identical bits."""

    k: int
    module_accuracies: tuple[float, ...]
    m: int
    seed: int
    mode: GeneratorMode = GeneratorMode.CALIBRATED

    def __post_init__(self) -> None:
        object.__setattr__(self, "module_accuracies", tuple(self.module_accuracies))
        object.__setattr__(self, "mode", GeneratorMode(self.mode))
        if self.k < 2:
            raise InvalidParameterError("need k >= 2 choices")
        if self.m < 1:
            raise InvalidParameterError("need m >= 1 instances")
        if not self.module_accuracies:
            raise InvalidParameterError("need at least one module accuracy")
        floor = 1.0 / self.k
        for a in self.module_accuracies:
            if not floor < a <= 1.0:
                raise InvalidParameterError(
                    f"module accuracy {a} outside (1/k, 1] = ({floor:.4g}, 1]"
                )
        if self.seed < 0:
            raise InvalidParameterError("seed must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.module_accuracies)


@dataclass(frozen=True)
class SyntheticDataset:
    """Forecasts, answers and the spec that generated them."""

    forecasts: ForecastSet
    answers: np.ndarray
    spec: GenerativeSpec

    def __post_init__(self) -> None:
        arr = np.asarray(self.answers, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "answers", arr)

    def guesses(self) -> np.ndarray:
        """Per-(instance, module) chosen index, recovered as the row argmax.

        Valid because an accuracy above 1/k always puts the largest mass on
        the guess.
        """
        return np.argmax(self.forecasts.probs, axis=2)


def gen_calibrated_independent(spec: GenerativeSpec) -> SyntheticDataset:
    """Draw a synthetic dataset under ``spec`` (see module docstring)."""
    rng = np.random.default_rng(spec.seed)
    m, n, k = spec.m, spec.n, spec.k
    answers = rng.integers(0, k, size=m)
    probs = np.empty((m, n, k), dtype=np.float64)
    rows = np.arange(m)
    for i, a in enumerate(spec.module_accuracies):
        correct = rng.random(m) < a
        # uniform over the k-1 wrong choices, skipping the answer slot
        off = rng.integers(0, k - 1, size=m)
        wrong = np.where(off < answers, off, off + 1)
        guess = np.where(correct, answers, wrong)
        if spec.mode is GeneratorMode.ONE_HOT:
            probs[:, i, :] = 0.0
            probs[rows, i, guess] = 1.0
        else:
            probs[:, i, :] = (1.0 - a) / (k - 1)
            probs[rows, i, guess] = a
    module_ids = tuple(f"m{i:02d}" for i in range(n))
    instance_ids = tuple(f"q{h:05d}" for h in range(m))
    forecasts = ForecastSet(instance_ids, module_ids, probs)
    return SyntheticDataset(forecasts, answers, spec)


def bayes_posterior(spec: GenerativeSpec, module_guesses) -> Distribution:
    """Exact answer posterior given each module's guess, by enumeration.

    Uses a uniform prior over the k choices and the generative likelihood
    ``Pr(guess | answer = j)``, which is ``a`` when the guess equals j and
    ``(1 - a) / (k - 1)`` otherwise.  With no modules the prior is returned.
    """
    guesses = np.asarray(module_guesses, dtype=np.int64)
    if guesses.ndim != 1 or guesses.size > spec.n:
        raise InvalidParameterError("one guess per module expected")
    if guesses.size and (guesses.min() < 0 or guesses.max() >= spec.k):
        raise InvalidParameterError("guess index outside the choice range")
    post = np.full(spec.k, 1.0 / spec.k)
    for i in range(guesses.size):
        a = spec.module_accuracies[i]
        lik = np.full(spec.k, (1.0 - a) / (spec.k - 1))
        lik[guesses[i]] = a
        post *= lik
    return Distribution._trusted(post / post.sum())


def duplicate_module(ds: SyntheticDataset, i: int) -> SyntheticDataset:
    """Append an exact copy of module ``i``'s forecasts (dependent evidence)."""
    if not 0 <= i < ds.forecasts.n:
        raise InvalidParameterError(f"module index {i} out of range")
    copy_id = f"{ds.forecasts.module_ids[i]}+copy"
    while copy_id in ds.forecasts.module_ids:
        copy_id += "+copy"
    forecasts = ds.forecasts.with_module(copy_id, ds.forecasts.probs[:, i, :])
    return SyntheticDataset(forecasts, ds.answers.copy(), ds.spec)


def as_question_set(ds: SyntheticDataset) -> QuestionSet:
    """Placeholder questions matching the dataset's ids, k and answers."""
    instances = []
    for h, iid in enumerate(ds.forecasts.instance_ids):
        stem = WordTuple((f"stem{h:05d}",))
        choices = tuple(WordTuple((f"choice{h:05d}x{j}",)) for j in range(ds.forecasts.k))
        instances.append(Instance(iid, stem, choices, int(ds.answers[h])))
    return QuestionSet(tuple(instances))
