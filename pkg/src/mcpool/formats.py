"""On-disk formats: questions, forecast caches, weights, module configs.

Questions and forecast caches are UTF-8 JSON Lines (one record per line);
weights and module configuration use an INI-style key-value layout that is
comfortable to edit by hand.  Writers are deterministic — identical in-memory
values always produce identical bytes — and all writes go through a
write-temp-then-rename step so a crash never leaves a half-written file.

Floats in the key-value files are rendered with 17 significant digits;
JSON floats use Python's shortest exact representation.  Both forms
round-trip to the identical double.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import ForecastSet, Instance, QuestionSet, Rule, WeightVector, WordTuple
from .errors import ConfigurationError, ConsistencyError, FormatError
from .lexical.modules import LexicalModule, build_module
from .optimize import OptimizerParams, TrainingReport

__all__ = [
    "atomic_write_text",
    "serialize_questions",
    "write_questions",
    "load_questions",
    "questions_digest",
    "serialize_forecast_cache",
    "write_forecast_cache",
    "load_forecast_cache",
    "align_cache",
    "write_weights",
    "load_weights",
    "load_module_config",
]


def atomic_write_text(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _float17(x: float) -> str:
    return format(float(x), ".17g")


# --------------------------------------------------------------------------
# questions


def serialize_questions(questions: QuestionSet) -> str:
    lines = []
    for inst in questions:
        record = {
            "id": inst.id,
            "stem": list(inst.stem.words),
            "choices": [list(c.words) for c in inst.choices],
            "answer": inst.answer,
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def write_questions(path: Path, questions: QuestionSet) -> None:
    atomic_write_text(path, serialize_questions(questions))


def _parse_jsonl(path: Path) -> list[tuple[int, dict]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise FormatError(f"{path}:{lineno}: record must be a JSON object")
        records.append((lineno, record))
    if not records:
        raise FormatError(f"{path}: no records found")
    return records


def load_questions(path: Path) -> QuestionSet:
    instances = []
    for lineno, record in _parse_jsonl(path):
        try:
            stem = WordTuple.of(*record["stem"])
            choices = tuple(WordTuple.of(*c) for c in record["choices"])
            instances.append(
                Instance(str(record["id"]), stem, choices, int(record["answer"]))
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}:{lineno}: malformed question record: {exc}") from exc
    return QuestionSet(tuple(instances))


def questions_digest(questions: QuestionSet) -> str:
    """Digest of the canonical serialization, for weights-file provenance."""
    payload = serialize_questions(questions).encode("utf-8")
    return "sha256:" + hashlib.sha256(payload).hexdigest()


# --------------------------------------------------------------------------
# forecast cache


def serialize_forecast_cache(forecasts: ForecastSet) -> str:
    lines = []
    for h, iid in enumerate(forecasts.instance_ids):
        for i, mid in enumerate(forecasts.module_ids):
            record = {
                "instance_id": iid,
                "module_id": mid,
                "probs": [float(p) for p in forecasts.probs[h, i]],
            }
            lines.append(json.dumps(record, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def write_forecast_cache(path: Path, forecasts: ForecastSet) -> None:
    atomic_write_text(path, serialize_forecast_cache(forecasts))


def load_forecast_cache(path: Path) -> ForecastSet:
    """Read a cache; requires a complete instances x modules grid.

    Records may appear in any order, but every (instance, module) pair must
    occur exactly once and all probability vectors must share one length.
    """
    cells: dict[tuple[str, str], list] = {}
    instance_order: list[str] = []
    module_order: list[str] = []
    seen_instances: set[str] = set()
    k = None
    for lineno, record in _parse_jsonl(path):
        try:
            iid = str(record["instance_id"])
            mid = str(record["module_id"])
            probs = [float(p) for p in record["probs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: malformed cache record: {exc}") from exc
        if k is None:
            k = len(probs)
        elif len(probs) != k:
            raise FormatError(
                f"{path}:{lineno}: probability vector length {len(probs)} != {k}"
            )
        key = (iid, mid)
        if key in cells:
            raise FormatError(f"{path}:{lineno}: duplicate record for {key}")
        cells[key] = probs
        if iid not in seen_instances:
            seen_instances.add(iid)
            instance_order.append(iid)
        if mid not in module_order:
            module_order.append(mid)
    missing = [
        (iid, mid)
        for iid in instance_order
        for mid in module_order
        if (iid, mid) not in cells
    ]
    if missing:
        raise ConsistencyError(
            f"{path}: partial cache; first missing cell {missing[0]}"
        )
    grid = np.array(
        [[cells[(iid, mid)] for mid in module_order] for iid in instance_order],
        dtype=np.float64,
    )
    return ForecastSet(tuple(instance_order), tuple(module_order), grid)


def align_cache(forecasts: ForecastSet, questions: QuestionSet) -> ForecastSet:
    """Reorder cache instances to question order; both must name the same ids."""
    if set(forecasts.instance_ids) != set(questions.ids):
        raise ConsistencyError(
            "forecast cache and question set name different instances"
        )
    if forecasts.k != questions.k:
        raise ConsistencyError(
            f"cache has k={forecasts.k} choices but questions have k={questions.k}"
        )
    if forecasts.instance_ids == questions.ids:
        return forecasts
    index = {iid: h for h, iid in enumerate(forecasts.instance_ids)}
    order = [index[iid] for iid in questions.ids]
    return ForecastSet(questions.ids, forecasts.module_ids,
                       forecasts.probs[order])


# --------------------------------------------------------------------------
# weights


def write_weights(path: Path, report: TrainingReport, params: OptimizerParams,
                  digest: str) -> None:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep module-id case
    weights = report.best_weights
    parser["weights"] = {"rule": weights.rule.value}
    for mid, w in zip(weights.module_ids, weights.weights):
        parser["weights"][mid] = _float17(w)
    parser["training"] = {
        "seed": str(params.seed),
        "restarts": str(params.restarts),
        "fd_delta": _float17(params.fd_delta),
        "grad_clip": _float17(params.grad_clip),
        "step_scale": _float17(params.step_scale),
        "grad_norm_stop": _float17(params.grad_norm_stop),
        "step_budget": str(params.step_budget),
        "smoothing_epsilon": _float17(params.smoothing_epsilon),
        "log_likelihood": _float17(report.log_likelihood),
        "mean_likelihood": _float17(report.mean_likelihood),
        "instances": str(report.instances),
        "questions_digest": digest,
    }
    buffer = io.StringIO()
    parser.write(buffer)
    atomic_write_text(path, buffer.getvalue())


def load_weights(path: Path) -> tuple[WeightVector, dict]:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if "weights" not in parser or "rule" not in parser["weights"]:
        raise FormatError(f"{path}: missing [weights] section with a rule")
    section = parser["weights"]
    rule = Rule.parse(section["rule"])
    module_ids = tuple(key for key in section if key != "rule")
    try:
        values = np.array([float(section[mid]) for mid in module_ids])
    except ValueError as exc:
        raise FormatError(f"{path}: bad weight value: {exc}") from exc
    metadata = dict(parser["training"]) if "training" in parser else {}
    return WeightVector(rule, module_ids, values), metadata


# --------------------------------------------------------------------------
# module configuration


def load_module_config(path: Path) -> list[LexicalModule]:
    """Build every ``[module:<id>]`` section of an INI config file."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise FormatError(f"{path}: {exc}") from exc
    base_dir = Path(path).parent
    modules = []
    for section in parser.sections():
        if not section.startswith("module:"):
            raise ConfigurationError(
                f"{path}: unexpected section [{section}]; expected [module:<id>]"
            )
        module_id = section.split(":", 1)[1].strip()
        if not module_id:
            raise ConfigurationError(f"{path}: empty module id in [{section}]")
        options = dict(parser[section])
        kind = options.pop("kind", None)
        if kind is None:
            raise ConfigurationError(
                f"{path}: module {module_id!r} is missing the 'kind' option"
            )
        modules.append(build_module(module_id, kind, options, base_dir))
    if not modules:
        raise ConfigurationError(f"{path}: no [module:<id>] sections found")
    return modules
