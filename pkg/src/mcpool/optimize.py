"""Maximum-likelihood weight training by restart hill-climbing.

The objective is the training log-likelihood ``S(w) = sum_h ln D_a(h)`` of
the merged forecasts at the correct answers; the reported mean likelihood is
its geometric-mean form ``exp(S/m)``.  Gradients are estimated by central
finite differences (one-sided at the feasible box), clipped per component,
and steps are scaled so the largest component moves ``step_scale``.  A step
that would lower the likelihood is halved until it improves, so accepted
steps are monotone.  The whole climb restarts from fresh uniform-random
starting points and the best final likelihood wins, ties breaking toward the
earlier restart.

Before training, forecasts are smoothed (``smoothing_epsilon`` added to each
probability, then renormalized) for the logarithmic and mixture rules; the
product rule trains on the raw forecasts, which it tolerates by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .core import ForecastSet, Rule, WeightVector, smooth_array, weight_bounds
from .errors import ConsistencyError, InvalidParameterError

__all__ = [
    "OptimizerParams",
    "RestartResult",
    "TrainingReport",
    "log_likelihood",
    "mean_likelihood",
    "estimate_gradient",
    "hillclimb",
    "optimize",
]

_MAX_HALVINGS = 30


@dataclass(frozen=True)
class OptimizerParams:
    """Free constants of the hill-climber; all overridable from the CLI."""

    fd_delta: float = 0.01
    grad_clip: float = 0.05
    step_scale: float = 0.05
    grad_norm_stop: float = 2.0
    step_budget: int = 500
    restarts: int = 10
    seed: int = 1
    smoothing_epsilon: float = 1e-5

    def __post_init__(self) -> None:
        for name in ("fd_delta", "grad_clip", "step_scale", "grad_norm_stop",
                     "smoothing_epsilon"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.step_budget < 1 or self.restarts < 1:
            raise InvalidParameterError("step_budget and restarts must be >= 1")
        if self.seed < 0:
            raise InvalidParameterError("seed must be nonnegative")

    def replace(self, **overrides) -> "OptimizerParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(overrides)
        return OptimizerParams(**values)


@dataclass(frozen=True)
class RestartResult:
    """Start point, end point and final log-likelihood of one climb."""

    start: tuple[float, ...]
    weights: tuple[float, ...]
    log_likelihood: float


@dataclass(frozen=True)
class TrainingReport:
    """Outcome of :func:`optimize` across all restarts."""

    best_weights: WeightVector
    log_likelihood: float
    mean_likelihood: float
    instances: int
    restarts: tuple[RestartResult, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "restarts", tuple(self.restarts))
        if self.instances < 1:
            raise InvalidParameterError("instances must be >= 1")
        if self.restarts:
            best = max(r.log_likelihood for r in self.restarts)
            if not (self.log_likelihood >= best or
                    math.isclose(self.log_likelihood, best, rel_tol=0, abs_tol=1e-12)):
                raise ConsistencyError("best likelihood below a restart's result")
        expected = math.exp(self.log_likelihood / self.instances)
        if not math.isclose(self.mean_likelihood, expected, rel_tol=1e-12, abs_tol=1e-15):
            raise ConsistencyError("mean likelihood inconsistent with log-likelihood")


def _prepare(rule: Rule | str, w, forecasts: ForecastSet | np.ndarray,
             answers) -> tuple[Rule, np.ndarray, np.ndarray, np.ndarray]:
    rule = Rule(rule)
    if isinstance(forecasts, ForecastSet):
        probs = forecasts.probs
        if isinstance(w, WeightVector):
            w = w.aligned_to(forecasts.module_ids)
    else:
        probs = np.asarray(forecasts, dtype=np.float64)
    weights = w.weights if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64)
    answers = np.asarray(answers, dtype=np.int64)
    if probs.ndim != 3 or weights.shape != (probs.shape[1],):
        raise ConsistencyError("forecast tensor and weights disagree on module count")
    if answers.shape != (probs.shape[0],):
        raise ConsistencyError("one answer index per instance required")
    if np.any(answers < 0) or np.any(answers >= probs.shape[2]):
        raise ConsistencyError("answer index outside the choice range")
    return rule, probs, weights, answers


def log_likelihood(rule: Rule | str, w, forecasts: ForecastSet | np.ndarray,
                   answers) -> float:
    """``sum_h ln D_a(h)`` under the rule; ``-inf`` when any term is zero.

    Always <= 0.  Callers smooth the forecasts first when using the
    logarithmic rule; a zero merged probability at a correct answer is
    reported as ``-inf`` rather than raised.
    """
    rule, probs, weights, answers = _prepare(rule, w, forecasts, answers)
    merged = kernels.merge_batch(rule, probs, weights)
    return kernels.gather_log_sum(merged, answers)


def mean_likelihood(rule: Rule | str, w, forecasts: ForecastSet | np.ndarray,
                    answers) -> float:
    """Geometric mean of the merged probabilities at correct answers."""
    rule, probs, weights, answers = _prepare(rule, w, forecasts, answers)
    merged = kernels.merge_batch(rule, probs, weights)
    ll = kernels.gather_log_sum(merged, answers)
    return math.exp(ll / probs.shape[0])


def _objective(rule: Rule, probs: np.ndarray,
               answers: np.ndarray) -> Callable[[np.ndarray], float]:
    rid = kernels.rule_id(rule)

    def score(weights: np.ndarray) -> float:
        merged = kernels.merge_batch(rid, probs, weights)
        return kernels.gather_log_sum(merged, answers)

    return score


def _fd_gradient(score: Callable[[np.ndarray], float], w: np.ndarray,
                 delta: float, lo: float, hi: float) -> np.ndarray:
    """Finite-difference gradient, one-sided where a step exits [lo, hi]."""
    g = np.empty_like(w)
    center = None
    for i in range(w.size):
        up_ok = w[i] + delta <= hi
        dn_ok = w[i] - delta >= lo
        probe = w.copy()
        if up_ok and dn_ok:
            probe[i] = w[i] + delta
            s_up = score(probe)
            probe[i] = w[i] - delta
            g[i] = (s_up - score(probe)) / (2.0 * delta)
        elif up_ok:
            if center is None:
                center = score(w)
            probe[i] = w[i] + delta
            g[i] = (score(probe) - center) / delta
        elif dn_ok:
            if center is None:
                center = score(w)
            probe[i] = w[i] - delta
            g[i] = (center - score(probe)) / delta
        else:
            g[i] = 0.0
    return np.where(np.isnan(g), 0.0, g)


def estimate_gradient(rule: Rule | str, w, forecasts: ForecastSet | np.ndarray,
                      answers, fd_delta: float = 0.01) -> np.ndarray:
    """Finite-difference estimate of the log-likelihood gradient at ``w``."""
    if fd_delta <= 0:
        raise InvalidParameterError("fd_delta must be positive")
    rule, probs, weights, answers = _prepare(rule, w, forecasts, answers)
    lo, hi = weight_bounds(rule)
    return _fd_gradient(_objective(rule, probs, answers), weights, fd_delta, lo, hi)


def _climb(score: Callable[[np.ndarray], float], w0: np.ndarray,
           lo: float, hi: float, params: OptimizerParams) -> tuple[np.ndarray, float]:
    w = np.clip(np.asarray(w0, dtype=np.float64).copy(), lo, hi)
    current = score(w)
    for _ in range(params.step_budget):
        g = _fd_gradient(score, w, params.fd_delta, lo, hi)
        if np.linalg.norm(g) < params.grad_norm_stop:
            break
        d = g.copy()
        d[(d > 0.0) & (w >= hi)] = 0.0
        d[(d < 0.0) & (w <= lo)] = 0.0
        d = np.clip(d, -params.grad_clip, params.grad_clip)
        top = np.max(np.abs(d))
        if top == 0.0 or not np.isfinite(top):
            break
        c = params.step_scale / top
        accepted = False
        for _ in range(_MAX_HALVINGS):
            trial = np.clip(w + c * d, lo, hi)
            value = score(trial)
            if value >= current:
                w, current, accepted = trial, value, True
                break
            c *= 0.5
        if not accepted:
            break
    return w, current


def hillclimb(rule: Rule | str, w0, forecasts: ForecastSet | np.ndarray,
              answers, params: OptimizerParams | None = None
              ) -> tuple[np.ndarray, float]:
    """Climb from ``w0``; returns the final weights and log-likelihood.

    The likelihood of accepted steps never decreases and the result stays
    inside the rule's weight box.
    """
    params = params or OptimizerParams()
    rule, probs, weights, answers = _prepare(rule, w0, forecasts, answers)
    lo, hi = weight_bounds(rule)
    if np.any(weights < lo) or np.any(weights > hi):
        raise InvalidParameterError("starting weights outside the feasible box")
    return _climb(_objective(rule, probs, answers), weights, lo, hi, params)


def optimize(rule: Rule | str, forecasts: ForecastSet, answers=None,
             params: OptimizerParams | None = None) -> TrainingReport:
    """Train weights for ``rule`` with seeded restart hill-climbing.

    Forecasts are smoothed for the logarithmic and mixture rules before
    training (the product rule sees them raw).  With a fixed seed the whole
    procedure, including the random starts, is deterministic.
    """
    params = params or OptimizerParams()
    rule = Rule(rule)
    if answers is None:
        raise ConsistencyError("answers are required for training")
    answers = np.asarray(answers, dtype=np.int64)
    probs = forecasts.probs
    if rule in (Rule.LOGARITHMIC, Rule.MIXTURE):
        probs = smooth_array(probs, params.smoothing_epsilon)
    _, probs, _, answers = _prepare(rule, np.zeros(forecasts.n), probs, answers)
    lo, hi = weight_bounds(rule)
    score = _objective(rule, probs, answers)

    rng = np.random.default_rng(params.seed)
    starts = rng.uniform(lo, hi, size=(params.restarts, forecasts.n))

    results: list[RestartResult] = []
    best_idx = 0
    for r in range(params.restarts):
        w, value = _climb(score, starts[r], lo, hi, params)
        results.append(RestartResult(tuple(starts[r]), tuple(w), value))
        if value > results[best_idx].log_likelihood:
            best_idx = r

    best = results[best_idx]
    weights = WeightVector(rule, forecasts.module_ids,
                           np.array(best.weights, dtype=np.float64))
    return TrainingReport(
        best_weights=weights,
        log_likelihood=best.log_likelihood,
        mean_likelihood=math.exp(best.log_likelihood / forecasts.m),
        instances=forecasts.m,
        restarts=tuple(results),
    )
