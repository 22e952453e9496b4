import numpy as np
import pytest

from mcpool import formats
from mcpool.core import ForecastSet, Rule
from mcpool.errors import ConfigurationError, ConsistencyError, FormatError
from mcpool.optimize import OptimizerParams, optimize
from mcpool.simulate import (
    GenerativeSpec,
    as_question_set,
    gen_calibrated_independent,
)


@pytest.fixture
def dataset():
    spec = GenerativeSpec(k=4, module_accuracies=(0.7, 0.9), m=30, seed=4)
    return gen_calibrated_independent(spec)


class TestQuestionsFile:
    def test_round_trip(self, tmp_path, dataset):
        questions = as_question_set(dataset)
        path = tmp_path / "q.jsonl"
        formats.write_questions(path, questions)
        again = formats.load_questions(path)
        assert again == questions

    def test_write_is_deterministic(self, tmp_path, dataset):
        questions = as_question_set(dataset)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        formats.write_questions(a, questions)
        formats.write_questions(b, questions)
        assert a.read_bytes() == b.read_bytes()

    def test_digest_tracks_content(self, dataset):
        questions = as_question_set(dataset)
        other = as_question_set(gen_calibrated_independent(
            GenerativeSpec(k=4, module_accuracies=(0.7, 0.9), m=30, seed=5)))
        assert formats.questions_digest(questions) != formats.questions_digest(other)
        assert formats.questions_digest(questions).startswith("sha256:")

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "stem": ["x"]\n')
        with pytest.raises(FormatError, match="invalid JSON"):
            formats.load_questions(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "stem": ["x"], "answer": 0}\n')
        with pytest.raises(FormatError, match="malformed"):
            formats.load_questions(path)

    def test_fixture_files_load(self, fixtures_dir):
        qs = formats.load_questions(fixtures_dir / "questions_synonym.jsonl")
        assert len(qs) == 3 and qs.k == 4
        qa = formats.load_questions(fixtures_dir / "questions_analogy.jsonl")
        assert qa.k == 3 and qa.instances[0].stem.arity == 2


class TestCacheFile:
    def test_round_trip(self, tmp_path, dataset):
        path = tmp_path / "cache.jsonl"
        formats.write_forecast_cache(path, dataset.forecasts)
        again = formats.load_forecast_cache(path)
        assert again.instance_ids == dataset.forecasts.instance_ids
        assert again.module_ids == dataset.forecasts.module_ids
        assert np.array_equal(again.probs, dataset.forecasts.probs)

    def test_partial_cache_rejected(self, tmp_path, dataset):
        path = tmp_path / "cache.jsonl"
        formats.write_forecast_cache(path, dataset.forecasts)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(ConsistencyError, match="partial cache"):
            formats.load_forecast_cache(path)

    def test_duplicate_record_rejected(self, tmp_path, dataset):
        path = tmp_path / "cache.jsonl"
        formats.write_forecast_cache(path, dataset.forecasts)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines + [lines[0]]) + "\n")
        with pytest.raises(FormatError, match="duplicate"):
            formats.load_forecast_cache(path)

    def test_ragged_vectors_rejected(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text(
            '{"instance_id": "a", "module_id": "m", "probs": [0.5, 0.5]}\n'
            '{"instance_id": "b", "module_id": "m", "probs": [0.5, 0.25, 0.25]}\n'
        )
        with pytest.raises(FormatError, match="length"):
            formats.load_forecast_cache(path)

    def test_align_reorders_instances(self, tmp_path, dataset):
        questions = as_question_set(dataset)
        shuffled = ForecastSet(
            tuple(reversed(dataset.forecasts.instance_ids)),
            dataset.forecasts.module_ids,
            dataset.forecasts.probs[::-1],
        )
        aligned = formats.align_cache(shuffled, questions)
        assert aligned.instance_ids == questions.ids
        assert np.array_equal(aligned.probs, dataset.forecasts.probs)

    def test_align_rejects_different_instances(self, dataset):
        questions = as_question_set(dataset)
        wrong = ForecastSet(("zz",) + dataset.forecasts.instance_ids[1:],
                            dataset.forecasts.module_ids,
                            dataset.forecasts.probs)
        with pytest.raises(ConsistencyError):
            formats.align_cache(wrong, questions)


class TestWeightsFile:
    def test_round_trip(self, tmp_path, dataset):
        params = OptimizerParams(seed=3, restarts=2)
        report = optimize(Rule.PRODUCT, dataset.forecasts, dataset.answers, params)
        path = tmp_path / "w.conf"
        digest = "sha256:" + "0" * 64
        formats.write_weights(path, report, params, digest)
        weights, meta = formats.load_weights(path)
        assert weights == report.best_weights
        assert meta["questions_digest"] == digest
        assert int(meta["seed"]) == 3
        assert float(meta["log_likelihood"]) == report.log_likelihood
        assert float(meta["mean_likelihood"]) == report.mean_likelihood

    def test_weight_precision_survives(self, tmp_path, dataset):
        params = OptimizerParams(seed=3, restarts=1)
        report = optimize(Rule.LOGARITHMIC, dataset.forecasts, dataset.answers,
                          params)
        path = tmp_path / "w.conf"
        formats.write_weights(path, report, params, "sha256:" + "0" * 64)
        weights, _ = formats.load_weights(path)
        assert np.array_equal(weights.weights, report.best_weights.weights)

    def test_missing_rule_rejected(self, tmp_path):
        path = tmp_path / "w.conf"
        path.write_text("[weights]\nm00 = 0.5\n")
        with pytest.raises(FormatError):
            formats.load_weights(path)


class TestModuleConfig:
    def test_loads_fixture_config(self, fixtures_dir):
        modules = formats.load_module_config(fixtures_dir / "modules_synonym.conf")
        assert [m.id for m in modules] == ["lsa", "pmi", "thesaurus", "connector"]

    def test_unknown_kind_is_error(self, tmp_path):
        path = tmp_path / "modules.conf"
        path.write_text("[module:x]\nkind = teleport\n")
        with pytest.raises(ConfigurationError, match="unknown kind"):
            formats.load_module_config(path)

    def test_missing_kind_is_error(self, tmp_path):
        path = tmp_path / "modules.conf"
        path.write_text("[module:x]\nvectors = emb.txt\n")
        with pytest.raises(ConfigurationError, match="kind"):
            formats.load_module_config(path)

    def test_foreign_section_is_error(self, tmp_path):
        path = tmp_path / "modules.conf"
        path.write_text("[weights]\nrule = product\n")
        with pytest.raises(ConfigurationError, match="module:"):
            formats.load_module_config(path)
