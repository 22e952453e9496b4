"""Solver scoring: accuracy, mean likelihood, skip-aware penalty, exact CIs.

Accuracy is threshold-free (a skipped question still counts as wrong), while
the penalty score lets a solver skip: it pays +1 per correct answer and
``-penalty`` per wrong one, guessing only when the top merged probability
strictly exceeds the threshold.  The break-even threshold for a given
penalty is ``penalty / (1 + penalty)``.

Confidence intervals are exact two-sided binomial (Clopper-Pearson) bounds,
computed from scratch by bisecting the regularized incomplete beta function,
so no statistics library is required at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, InvalidParameterError
from .merge import MergedForecast

__all__ = [
    "EvaluationReport",
    "accuracy",
    "penalty_score",
    "expected_utility_threshold",
    "clopper_pearson",
    "evaluate",
    "render_table",
]

DEFAULT_PENALTY = 0.5
DEFAULT_THRESHOLD = 1.0 / 3.0

_BISECT_TOL = 1e-10


@dataclass(frozen=True)
class EvaluationReport:
    """Metrics for one solver on one question set."""

    accuracy: float
    mean_likelihood: float
    penalty_score: float
    answered: int
    skipped: int
    ci95: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "mean_likelihood": self.mean_likelihood,
            "penalty_score": self.penalty_score,
            "answered": self.answered,
            "skipped": self.skipped,
            "ci95": list(self.ci95),
        }


def _merged_probs(merged: MergedForecast | np.ndarray) -> np.ndarray:
    probs = merged.probs if isinstance(merged, MergedForecast) else np.asarray(merged)
    if probs.ndim != 2:
        raise ConsistencyError("merged forecasts must form an (instances, choices) grid")
    return probs


def _check_sizes(probs: np.ndarray, answers: np.ndarray) -> None:
    if answers.shape != (probs.shape[0],):
        raise ConsistencyError(
            f"{probs.shape[0]} merged rows but {answers.shape[0]} answers"
        )
    if np.any(answers < 0) or np.any(answers >= probs.shape[1]):
        raise ConsistencyError("answer index outside the choice range")


def accuracy(merged: MergedForecast | np.ndarray, answers) -> float:
    """Fraction of instances whose top merged choice is the correct answer.

    Ties at the top break toward the lowest index, making the result
    deterministic.
    """
    probs = _merged_probs(merged)
    answers = np.asarray(answers, dtype=np.int64)
    _check_sizes(probs, answers)
    return float(np.mean(np.argmax(probs, axis=1) == answers))


def _penalty_parts(probs: np.ndarray, answers: np.ndarray, penalty: float,
                   threshold: float) -> tuple[float, int, int]:
    answered_mask = probs.max(axis=1) > threshold
    picks = np.argmax(probs, axis=1)
    correct = answered_mask & (picks == answers)
    wrong = answered_mask & (picks != answers)
    score = float(correct.sum()) - penalty * float(wrong.sum())
    answered = int(answered_mask.sum())
    return score, answered, probs.shape[0] - answered


def penalty_score(merged: MergedForecast | np.ndarray, answers,
                  penalty: float = DEFAULT_PENALTY,
                  threshold: float = DEFAULT_THRESHOLD) -> float:
    """Total score under skip-aware scoring.

    An instance is answered only when its top probability strictly exceeds
    ``threshold`` (ties at the threshold skip); skipped instances score 0.
    """
    if penalty < 0:
        raise InvalidParameterError("penalty must be >= 0")
    probs = _merged_probs(merged)
    answers = np.asarray(answers, dtype=np.int64)
    _check_sizes(probs, answers)
    score, _, _ = _penalty_parts(probs, answers, penalty, threshold)
    return score


def expected_utility_threshold(penalty: float) -> float:
    """Top probability at which guessing and skipping have equal utility.

    Solves ``p - (1 - p) * penalty = 0``; a solver should guess whenever its
    confidence exceeds the returned value.
    """
    if penalty < 0:
        raise InvalidParameterError("penalty must be >= 0")
    return penalty / (1.0 + penalty)


# --------------------------------------------------------------------------
# exact binomial interval


def _beta_cont_fraction(a: float, b: float, x: float) -> float:
    # Lentz continued-fraction evaluation for the incomplete beta integral.
    max_iter, eps, tiny = 300, 1e-16, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the CDF of the Beta(a, b) distribution at x."""
    if a <= 0 or b <= 0:
        raise InvalidParameterError("beta shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_fraction(a, b, x) / a
    return 1.0 - front * _beta_cont_fraction(b, a, 1.0 - x) / b


def _beta_quantile(p: float, a: float, b: float) -> float:
    lo, hi = 0.0, 1.0
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if regularized_incomplete_beta(a, b, mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def clopper_pearson(correct: int, total: int, level: float = 0.95
                    ) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval for ``correct / total``.

    The lower bound is 0 when ``correct == 0`` and the upper bound 1 when
    ``correct == total``; otherwise the bounds are the inverted beta
    quantiles at ``(1 - level) / 2`` tails.
    """
    if total < 1 or not 0 <= correct <= total:
        raise InvalidParameterError(
            f"invalid counts: correct={correct}, total={total}"
        )
    if not 0.0 < level < 1.0:
        raise InvalidParameterError("confidence level must lie in (0, 1)")
    alpha = 1.0 - level
    low = 0.0 if correct == 0 else _beta_quantile(alpha / 2.0, correct,
                                                  total - correct + 1)
    high = 1.0 if correct == total else _beta_quantile(1.0 - alpha / 2.0,
                                                       correct + 1, total - correct)
    return low, high


def evaluate(merged: MergedForecast | np.ndarray, answers,
             penalty: float = DEFAULT_PENALTY,
             threshold: float = DEFAULT_THRESHOLD,
             level: float = 0.95) -> EvaluationReport:
    """Full metric bundle for one solver's merged forecasts."""
    if penalty < 0:
        raise InvalidParameterError("penalty must be >= 0")
    probs = _merged_probs(merged)
    answers = np.asarray(answers, dtype=np.int64)
    _check_sizes(probs, answers)
    m = probs.shape[0]
    picks = np.argmax(probs, axis=1)
    n_correct = int((picks == answers).sum())
    truth = probs[np.arange(m), answers]
    mean_lik = 0.0 if np.any(truth <= 0.0) else float(np.exp(np.log(truth).mean()))
    score, answered, skipped = _penalty_parts(probs, answers, penalty, threshold)
    return EvaluationReport(
        accuracy=n_correct / m,
        mean_likelihood=mean_lik,
        penalty_score=score,
        answered=answered,
        skipped=skipped,
        ci95=clopper_pearson(n_correct, m, level=level),
    )


def render_table(rows: list[tuple[str, EvaluationReport]]) -> str:
    """Readable comparison table: one row per solver."""
    header = (f"{'Solver':<24} {'Accuracy':>9} {'Mean lik.':>10} "
              f"{'Penalty':>8} {'Ans/Skip':>9} {'95% CI':>17}")
    lines = [header, "-" * len(header)]
    for name, rep in rows:
        ci = f"{rep.ci95[0] * 100:5.2f}-{rep.ci95[1] * 100:5.2f}%"
        lines.append(
            f"{name:<24} {rep.accuracy * 100:8.1f}% {rep.mean_likelihood:10.4f} "
            f"{rep.penalty_score:8.1f} {rep.answered:>4}/{rep.skipped:<4} {ci:>17}"
        )
    return "\n".join(lines)
