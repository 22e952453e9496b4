"""Opinion-pool forecast fusion for multiple-choice solvers.

Merge per-module probability forecasts with the mixture, logarithmic or
product rule, train the rule weights by maximum likelihood, and evaluate the
result with accuracy, mean likelihood, skip-aware penalty scores and exact
binomial confidence intervals.  Offline lexical solver modules and a
synthetic forecast generator live in the subpackages.
"""

from .core import (
    DEFAULT_SMOOTHING_EPSILON,
    Distribution,
    ForecastSet,
    Instance,
    QuestionSet,
    Rule,
    TaskKind,
    WeightVector,
    WordTuple,
    argmax_choice,
    normalize,
    smooth,
)
from .evaluate import (
    EvaluationReport,
    accuracy,
    clopper_pearson,
    evaluate,
    expected_utility_threshold,
    penalty_score,
)
from .merge import (
    MergedForecast,
    logarithmic_merge,
    merge,
    merge_forecast_set,
    mixture_merge,
    product_merge,
)
from .optimize import (
    OptimizerParams,
    TrainingReport,
    estimate_gradient,
    hillclimb,
    log_likelihood,
    mean_likelihood,
    optimize,
)
from .simulate import (
    GenerativeSpec,
    GeneratorMode,
    SyntheticDataset,
    bayes_posterior,
    duplicate_module,
    gen_calibrated_independent,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SMOOTHING_EPSILON",
    "Distribution",
    "EvaluationReport",
    "ForecastSet",
    "GenerativeSpec",
    "GeneratorMode",
    "Instance",
    "MergedForecast",
    "OptimizerParams",
    "QuestionSet",
    "Rule",
    "SyntheticDataset",
    "TaskKind",
    "TrainingReport",
    "WeightVector",
    "WordTuple",
    "accuracy",
    "argmax_choice",
    "bayes_posterior",
    "clopper_pearson",
    "duplicate_module",
    "estimate_gradient",
    "evaluate",
    "expected_utility_threshold",
    "gen_calibrated_independent",
    "hillclimb",
    "log_likelihood",
    "logarithmic_merge",
    "mean_likelihood",
    "merge",
    "merge_forecast_set",
    "mixture_merge",
    "normalize",
    "optimize",
    "penalty_score",
    "product_merge",
    "smooth",
]
