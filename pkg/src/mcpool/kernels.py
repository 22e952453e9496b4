"""Batched pooling kernels: the numeric hot path.

Weight training evaluates the pooled likelihood thousands of times over the
full (instances, modules, choices) tensor, so the inner loops live here in
two interchangeable implementations:

* ``numba``  — ``@njit``-compiled loops (default when numba imports cleanly)
* ``numpy``  — pure vectorized fallback

Set ``MCPOOL_BACKEND=numpy`` (or ``numba``) in the environment to force a
backend; ``benchmarks/bench_kernels.py`` compares the two.  Both produce the
same results up to floating-point rounding; bitwise determinism holds within
a backend, not across backends.

Inputs are trusted here (validation happens in :mod:`mcpool.merge` and
:mod:`mcpool.optimize`): ``probs`` is float64 (m, n, k), ``weights`` float64
(n,), ``answers`` int64 (m,).

Degenerate rows resolve as follows: a row whose pooled scores sum to zero
becomes uniform for the mixture and product rules (no usable evidence), while
the logarithmic rule returns an all-zero row so that downstream likelihoods
see impossibility rather than a silent uniform.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

RULE_MIXTURE = 0
RULE_LOGARITHMIC = 1
RULE_PRODUCT = 2

_RULE_IDS = {"mixture": RULE_MIXTURE, "logarithmic": RULE_LOGARITHMIC,
             "product": RULE_PRODUCT}


def rule_id(rule) -> int:
    """Map a rule name (or Rule enum) to its kernel dispatch id."""
    if isinstance(rule, int):
        return rule
    name = getattr(rule, "value", rule)
    return _RULE_IDS[str(name)]


# --------------------------------------------------------------------------
# numpy implementations


def _mixture_np(probs: np.ndarray, weights: np.ndarray) -> np.ndarray:
    scores = np.einsum("hik,i->hk", probs, weights)
    totals = scores.sum(axis=1, keepdims=True)
    k = probs.shape[2]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(totals > 0.0, scores / totals, 1.0 / k)
    return out


def _logarithmic_np(probs: np.ndarray, weights: np.ndarray) -> np.ndarray:
    m, n, k = probs.shape
    active = weights != 0.0
    if not np.any(active):
        return np.full((m, k), 1.0 / k)
    with np.errstate(divide="ignore"):
        logs = np.log(probs[:, active, :])
    scores = np.einsum("hik,i->hk", logs, weights[active])
    shift = scores.max(axis=1, keepdims=True)
    dead = ~np.isfinite(shift[:, 0])
    shift[dead] = 0.0
    ex = np.exp(scores - shift)
    totals = ex.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = ex / totals
    out[dead] = 0.0
    return out


def _product_np(probs: np.ndarray, weights: np.ndarray) -> np.ndarray:
    k = probs.shape[2]
    w = weights[None, :, None]
    factors = w * probs + (1.0 - w) / k
    scores = factors.prod(axis=1)
    totals = scores.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(totals > 0.0, scores / totals, 1.0 / k)
    return out


def _gather_log_sum_np(merged: np.ndarray, answers: np.ndarray) -> float:
    picked = merged[np.arange(merged.shape[0]), answers]
    if np.any(picked <= 0.0):
        return float("-inf")
    return float(np.log(picked).sum())


# --------------------------------------------------------------------------
# numba implementations

try:  # pragma: no cover - exercised indirectly through the backend switch
    from numba import njit

    @njit(cache=True)
    def _mixture_nb(probs, weights):
        m, n, k = probs.shape
        out = np.empty((m, k))
        for h in range(m):
            total = 0.0
            for j in range(k):
                s = 0.0
                for i in range(n):
                    s += weights[i] * probs[h, i, j]
                out[h, j] = s
                total += s
            if total > 0.0:
                for j in range(k):
                    out[h, j] /= total
            else:
                for j in range(k):
                    out[h, j] = 1.0 / k
        return out

    @njit(cache=True)
    def _logarithmic_nb(probs, weights):
        m, n, k = probs.shape
        out = np.empty((m, k))
        for h in range(m):
            shift = -np.inf
            for j in range(k):
                s = 0.0
                for i in range(n):
                    w = weights[i]
                    if w != 0.0:
                        s += w * np.log(probs[h, i, j])
                out[h, j] = s
                if s > shift:
                    shift = s
            if shift == -np.inf:
                for j in range(k):
                    out[h, j] = 0.0
                continue
            total = 0.0
            for j in range(k):
                v = np.exp(out[h, j] - shift)
                out[h, j] = v
                total += v
            for j in range(k):
                out[h, j] /= total
        return out

    @njit(cache=True)
    def _product_nb(probs, weights):
        m, n, k = probs.shape
        out = np.empty((m, k))
        for h in range(m):
            total = 0.0
            for j in range(k):
                f = 1.0
                for i in range(n):
                    w = weights[i]
                    f *= w * probs[h, i, j] + (1.0 - w) / k
                out[h, j] = f
                total += f
            if total > 0.0:
                for j in range(k):
                    out[h, j] /= total
            else:
                for j in range(k):
                    out[h, j] = 1.0 / k
        return out

    @njit(cache=True)
    def _gather_log_sum_nb(merged, answers):
        total = 0.0
        for h in range(merged.shape[0]):
            v = merged[h, answers[h]]
            if v <= 0.0:
                return -np.inf
            total += np.log(v)
        return total

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


_IMPLS = {
    "numpy": {
        RULE_MIXTURE: _mixture_np,
        RULE_LOGARITHMIC: _logarithmic_np,
        RULE_PRODUCT: _product_np,
        "gather": _gather_log_sum_np,
    },
}
if _HAVE_NUMBA:
    _IMPLS["numba"] = {
        RULE_MIXTURE: _mixture_nb,
        RULE_LOGARITHMIC: _logarithmic_nb,
        RULE_PRODUCT: _product_nb,
        "gather": _gather_log_sum_nb,
    }


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def _default_backend() -> str:
    requested = os.environ.get("MCPOOL_BACKEND", "auto").strip().lower()
    if requested in ("", "auto"):
        return "numba" if _HAVE_NUMBA else "numpy"
    if requested == "numba" and not _HAVE_NUMBA:
        warnings.warn("MCPOOL_BACKEND=numba but numba is unavailable; using numpy")
        return "numpy"
    if requested not in ("numba", "numpy"):
        warnings.warn(f"unknown MCPOOL_BACKEND={requested!r}; using auto selection")
        return "numba" if _HAVE_NUMBA else "numpy"
    return requested


BACKEND = _default_backend()


def _impl(backend: str | None):
    return _IMPLS[BACKEND if backend is None else backend]


def merge_batch(rule, probs: np.ndarray, weights: np.ndarray,
                backend: str | None = None) -> np.ndarray:
    """Pool an (m, n, k) forecast tensor into (m, k) merged distributions."""
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    return _impl(backend)[rule_id(rule)](probs, weights)


def gather_log_sum(merged: np.ndarray, answers: np.ndarray,
                   backend: str | None = None) -> float:
    """Sum of log probabilities at the answer indices; -inf if any is zero."""
    merged = np.ascontiguousarray(merged, dtype=np.float64)
    answers = np.ascontiguousarray(answers, dtype=np.int64)
    return float(_impl(backend)["gather"](merged, answers))


def warmup(backend: str | None = None) -> None:
    """Force JIT compilation so later calls run at steady-state speed."""
    probs = np.full((2, 2, 2), 0.5)
    weights = np.array([0.5, 0.5])
    answers = np.zeros(2, dtype=np.int64)
    for rid in (RULE_MIXTURE, RULE_LOGARITHMIC, RULE_PRODUCT):
        merged = _impl(backend)[rid](probs, weights)
        _impl(backend)["gather"](merged, answers)
