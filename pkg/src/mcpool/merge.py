"""The three pooling rules that combine n module forecasts into one.

Given per-module distributions ``p_1 .. p_n`` over k choices and weights
``w_1 .. w_n``:

* mixture      — scores ``sum_i w_i * p_ij`` (linear opinion pool)
* logarithmic  — scores ``prod_i p_ij ** w_i`` (log opinion pool)
* product      — scores ``prod_i (w_i * p_ij + (1 - w_i) / k)``, i.e. each
  module is blended with the uniform distribution before multiplying

all normalized over j.  A module with weight zero has no influence under any
rule, and the product and logarithmic rules coincide when every weight is
zero or one.  An all-zero weight vector yields the uniform distribution: the
mixture formula is 0/0 there and uniform is the limit the other rules share.

The logarithmic scores are computed in log space with a max shift, which is
mathematically identical to the power-product form but does not underflow
for many modules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import Distribution, ForecastSet, Rule, WeightVector
from .errors import ConfigurationError, DomainError

__all__ = [
    "MergedForecast",
    "merge",
    "merge_forecast_set",
    "mixture_merge",
    "logarithmic_merge",
    "product_merge",
]


def _stack(forecasts: Sequence[Distribution]) -> np.ndarray:
    if not forecasts:
        raise ConfigurationError("need at least one module forecast")
    k = forecasts[0].k
    for d in forecasts:
        if d.k != k:
            raise ConfigurationError("module forecasts disagree on choice count")
    return np.stack([d.probs for d in forecasts])[None, :, :]


def _check_weights(w: WeightVector, expected_rule: Rule, n: int) -> None:
    if Rule(w.rule) is not expected_rule:
        raise ConfigurationError(
            f"weight vector is for the {w.rule.value} rule, not {expected_rule.value}"
        )
    if w.n != n:
        raise ConfigurationError(f"{n} forecasts but {w.n} weights")


def mixture_merge(forecasts: Sequence[Distribution], w: WeightVector) -> Distribution:
    """Weighted arithmetic pooling of the module forecasts."""
    _check_weights(w, Rule.MIXTURE, len(forecasts))
    merged = kernels.merge_batch(Rule.MIXTURE, _stack(forecasts), w.weights)
    return Distribution._trusted(merged[0])


def logarithmic_merge(forecasts: Sequence[Distribution], w: WeightVector) -> Distribution:
    """Weighted geometric pooling; requires strictly positive inputs.

    Raises :class:`DomainError` when a zero probability meets a positive
    weight — smooth the forecasts first (see :func:`mcpool.core.smooth`).
    """
    _check_weights(w, Rule.LOGARITHMIC, len(forecasts))
    stacked = _stack(forecasts)
    _require_positive(stacked, w.weights)
    merged = kernels.merge_batch(Rule.LOGARITHMIC, stacked, w.weights)
    return Distribution._trusted(merged[0])


def product_merge(forecasts: Sequence[Distribution], w: WeightVector) -> Distribution:
    """Pooling by multiplying uniform-blended module forecasts.

    Robust to zero input probabilities by construction.  In the degenerate
    case where weight-1 modules contradict so strongly that every choice gets
    a zero score, the result is uniform.
    """
    _check_weights(w, Rule.PRODUCT, len(forecasts))
    merged = kernels.merge_batch(Rule.PRODUCT, _stack(forecasts), w.weights)
    return Distribution._trusted(merged[0])


_MERGERS = {
    Rule.MIXTURE: mixture_merge,
    Rule.LOGARITHMIC: logarithmic_merge,
    Rule.PRODUCT: product_merge,
}


def merge(rule: Rule | str, forecasts: Sequence[Distribution],
          w: WeightVector) -> Distribution:
    """Dispatch to the rule's merge operation; ``rule`` must match ``w.rule``."""
    rule = Rule(rule)
    if rule is not Rule(w.rule):
        raise ConfigurationError(
            f"requested rule {rule.value} but weights are for {w.rule.value}"
        )
    return _MERGERS[rule](forecasts, w)


def _require_positive(probs: np.ndarray, weights: np.ndarray) -> None:
    positive = weights > 0.0
    if np.any(positive) and np.any(probs[:, positive, :] == 0.0):
        raise DomainError(
            "logarithmic rule saw a zero probability under a positive weight; "
            "smooth the forecasts first"
        )


@dataclass(frozen=True)
class MergedForecast:
    """Per-instance merged distributions plus the weights that produced them."""

    instance_ids: tuple[str, ...]
    weights: WeightVector
    probs: np.ndarray  # (m, k)

    def __post_init__(self) -> None:
        object.__setattr__(self, "instance_ids", tuple(self.instance_ids))
        arr = np.asarray(self.probs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != len(self.instance_ids):
            raise ConfigurationError(
                f"merged grid must have shape ({len(self.instance_ids)}, k), got {arr.shape}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def rule(self) -> Rule:
        return self.weights.rule

    @property
    def m(self) -> int:
        return self.probs.shape[0]

    @property
    def k(self) -> int:
        return self.probs.shape[1]

    def distribution(self, h: int) -> Distribution:
        return Distribution._trusted(self.probs[h].copy())


def merge_forecast_set(forecasts: ForecastSet, w: WeightVector,
                       backend: str | None = None) -> MergedForecast:
    """Merge every instance of a forecast set under ``w``.

    Weights are aligned to the forecast set's module order by id, so the
    caller does not need to keep the two sorted consistently.
    """
    aligned = w.aligned_to(forecasts.module_ids)
    if Rule(w.rule) is Rule.LOGARITHMIC:
        _require_positive(forecasts.probs, aligned.weights)
    merged = kernels.merge_batch(w.rule, forecasts.probs, aligned.weights,
                                 backend=backend)
    return MergedForecast(forecasts.instance_ids, aligned, merged)
