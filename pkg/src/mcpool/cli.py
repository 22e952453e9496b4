"""Command-line pipeline: score modules, train weights, evaluate, predict.

Commands communicate only through files (questions, forecast caches, weights,
module configs), so every stage is reproducible in isolation: identical
inputs, flags and seed produce byte-identical outputs.

Exit codes: 0 success, 2 input or resource problem, 3 inconsistent inputs,
4 numeric failure.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import formats
from .core import Rule
from .errors import (
    ConfigurationError,
    ConsistencyError,
    DomainError,
    FormatError,
    InvalidDistributionError,
    InvalidParameterError,
    InvalidScoreError,
    McpoolError,
    ResourceError,
)
from .evaluate import (
    DEFAULT_PENALTY,
    evaluate,
    expected_utility_threshold,
    render_table,
)
from .lexical.modules import run_modules
from .merge import merge_forecast_set
from .optimize import OptimizerParams, optimize
from .simulate import (
    GenerativeSpec,
    GeneratorMode,
    as_question_set,
    gen_calibrated_independent,
)

CONFIG_ENV_VAR = "MCPOOL_MODULE_CONFIG"
DEFAULT_CONFIG_PATH = "modules.conf"

EXIT_INPUT = 2
EXIT_INCONSISTENT = 3
EXIT_NUMERIC = 4

_INPUT_ERRORS = (
    ResourceError,
    FormatError,
    ConfigurationError,
    InvalidParameterError,
    InvalidScoreError,
    InvalidDistributionError,
    DomainError,
    FileNotFoundError,
)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except _INPUT_ERRORS as exc:
            _fail(EXIT_INPUT, str(exc))
        except ConsistencyError as exc:
            _fail(EXIT_INCONSISTENT, str(exc))
        except (FloatingPointError, OverflowError, ZeroDivisionError) as exc:
            _fail(EXIT_NUMERIC, f"numeric failure: {exc}")
        except McpoolError as exc:
            _fail(EXIT_INPUT, str(exc))

    return wrapper


@click.group()
def main() -> None:
    """Merge multiple-choice forecasts with trained opinion pools."""


@main.command("run-modules")
@click.argument("questions_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("config_path", required=False,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="Forecast cache to write.")
@_guarded
def cmd_run_modules(questions_path: str, config_path: str | None,
                    out_path: str) -> None:
    """Score every configured module on QUESTIONS_PATH into a cache.

    The module config comes from CONFIG_PATH, from $MCPOOL_MODULE_CONFIG, or
    from ./modules.conf, in that order.
    """
    if config_path is None:
        config_path = os.environ.get(CONFIG_ENV_VAR, DEFAULT_CONFIG_PATH)
        if not Path(config_path).is_file():
            raise ResourceError(f"module config not found: {config_path}")
    questions = formats.load_questions(Path(questions_path))
    modules = formats.load_module_config(Path(config_path))
    forecasts = run_modules(modules, questions)
    formats.write_forecast_cache(Path(out_path), forecasts)
    click.echo(
        f"wrote {forecasts.m * forecasts.n} forecasts "
        f"({forecasts.m} instances x {forecasts.n} modules) to {out_path}"
    )


def _optimizer_params(seed: int, **overrides) -> OptimizerParams:
    given = {key: value for key, value in overrides.items() if value is not None}
    return OptimizerParams(seed=seed, **given)


@main.command("train")
@click.argument("cache_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("questions_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--rule", required=True,
              type=click.Choice([r.value for r in Rule]), help="Pooling rule.")
@click.option("--seed", default=1, show_default=True, type=int,
              help="Seed for the random restarts.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="Weights file to write.")
@click.option("--restarts", type=int, default=None)
@click.option("--step-budget", type=int, default=None)
@click.option("--fd-delta", type=float, default=None)
@click.option("--grad-clip", type=float, default=None)
@click.option("--step-scale", type=float, default=None)
@click.option("--grad-norm-stop", type=float, default=None)
@click.option("--smoothing-epsilon", type=float, default=None)
@_guarded
def cmd_train(cache_path: str, questions_path: str, rule: str, seed: int,
              out_path: str, **overrides) -> None:
    """Fit rule weights on a forecast cache by maximum likelihood."""
    questions = formats.load_questions(Path(questions_path))
    cache = formats.load_forecast_cache(Path(cache_path))
    forecasts = formats.align_cache(cache, questions)
    params = _optimizer_params(seed, **overrides)
    report = optimize(Rule(rule), forecasts, questions.answers(), params)
    for idx, restart in enumerate(report.restarts):
        click.echo(f"restart {idx}: log-likelihood {restart.log_likelihood:.6f}")
    click.echo(f"best log-likelihood {report.log_likelihood:.6f}")
    click.echo(f"mean likelihood {report.mean_likelihood:.6f}")
    formats.write_weights(Path(out_path), report, params,
                          formats.questions_digest(questions))
    click.echo(f"wrote weights to {out_path}")


def _individual_rows(forecasts, answers, seed: int, penalty: float,
                     threshold: float) -> list:
    rows = []
    params = OptimizerParams(seed=seed)
    for mid in forecasts.module_ids:
        single = forecasts.select_modules([mid])
        report = optimize(Rule.PRODUCT, single, answers, params)
        merged = merge_forecast_set(single, report.best_weights)
        rows.append((mid, evaluate(merged, answers, penalty=penalty,
                                   threshold=threshold)))
    return rows


@main.command("eval")
@click.argument("cache_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("questions_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("weights_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--penalty", default=DEFAULT_PENALTY, show_default=True, type=float,
              help="Points deducted per wrong answer in the penalty score.")
@click.option("--threshold", default=None, type=float,
              help="Guess when the top probability exceeds this "
                   "[default: penalty/(1+penalty)].")
@click.option("--individual/--no-individual", default=True, show_default=True,
              help="Also score each module alone (product-rule single weight).")
@click.option("--json-out", "json_path", type=click.Path(dir_okay=False),
              default=None, help="Write the reports as JSON.")
@_guarded
def cmd_eval(cache_path: str, questions_path: str, weights_path: str,
             penalty: float, threshold: float | None, individual: bool,
             json_path: str | None) -> None:
    """Score merged (and optionally per-module) forecasts against answers."""
    questions = formats.load_questions(Path(questions_path))
    cache = formats.load_forecast_cache(Path(cache_path))
    forecasts = formats.align_cache(cache, questions)
    weights, metadata = formats.load_weights(Path(weights_path))
    if threshold is None:
        threshold = expected_utility_threshold(penalty)
    answers = questions.answers()

    rows = []
    if individual:
        seed = int(metadata.get("seed", 1))
        rows.extend(_individual_rows(forecasts, answers, seed, penalty, threshold))
    merged = merge_forecast_set(forecasts, weights)
    rows.append((f"merged:{weights.rule.value}",
                 evaluate(merged, answers, penalty=penalty, threshold=threshold)))

    click.echo(render_table(rows))
    if json_path is not None:
        payload = {
            "penalty": penalty,
            "threshold": threshold,
            "solvers": [{"name": name, **rep.as_dict()} for name, rep in rows],
        }
        formats.atomic_write_text(Path(json_path),
                                  json.dumps(payload, indent=2) + "\n")
        click.echo(f"wrote report to {json_path}")


@main.command("simulate")
@click.option("--k", required=True, type=int, help="Choices per question.")
@click.option("--m", required=True, type=int, help="Number of instances.")
@click.option("--acc", "accuracies", required=True, multiple=True, type=float,
              help="Module accuracy in (1/k, 1]; repeat per module.")
@click.option("--seed", default=1, show_default=True, type=int)
@click.option("--mode", default=GeneratorMode.CALIBRATED.value, show_default=True,
              type=click.Choice([m.value for m in GeneratorMode]),
              help="calibrated emits honest probabilities; one_hot emits "
                   "all-or-nothing guesses.")
@click.option("--out-cache", required=True, type=click.Path(dir_okay=False))
@click.option("--out-questions", required=True, type=click.Path(dir_okay=False))
@_guarded
def cmd_simulate(k: int, m: int, accuracies: tuple, seed: int, mode: str,
                 out_cache: str, out_questions: str) -> None:
    """Generate a synthetic question set plus matching forecast cache."""
    spec = GenerativeSpec(k=k, module_accuracies=tuple(accuracies), m=m,
                          seed=seed, mode=GeneratorMode(mode))
    dataset = gen_calibrated_independent(spec)
    formats.write_questions(Path(out_questions), as_question_set(dataset))
    formats.write_forecast_cache(Path(out_cache), dataset.forecasts)
    click.echo(f"seed {seed}")
    click.echo(f"wrote {out_questions} and {out_cache}")


@main.command("predict")
@click.argument("cache_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("weights_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("questions_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--threshold", default=1.0 / 3.0, show_default="1/3", type=float,
              help="Skip instances whose top probability does not exceed this.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write predictions here instead of stdout.")
@_guarded
def cmd_predict(cache_path: str, weights_path: str, questions_path: str,
                threshold: float, out_path: str | None) -> None:
    """Emit one merged prediction per instance as JSON lines."""
    questions = formats.load_questions(Path(questions_path))
    cache = formats.load_forecast_cache(Path(cache_path))
    forecasts = formats.align_cache(cache, questions)
    weights, _ = formats.load_weights(Path(weights_path))
    merged = merge_forecast_set(forecasts, weights)
    lines = []
    for h, iid in enumerate(merged.instance_ids):
        row = merged.probs[h]
        record = {
            "id": iid,
            "choice": int(np.argmax(row)),
            "probs": [float(p) for p in row],
            "skip": bool(row.max() <= threshold),
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    text = "\n".join(lines) + "\n"
    if out_path is None:
        click.echo(text, nl=False)
    else:
        formats.atomic_write_text(Path(out_path), text)
        click.echo(f"wrote predictions to {out_path}")


if __name__ == "__main__":
    main()
