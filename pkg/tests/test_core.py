import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcpool.core import (
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
    normalize_token,
    smooth,
)
from mcpool.errors import (
    ConsistencyError,
    InvalidDistributionError,
    InvalidParameterError,
    InvalidScoreError,
)


def vectors(min_k=2, max_k=6, min_value=0.0, max_value=10.0):
    return st.lists(
        st.floats(min_value=min_value, max_value=max_value, allow_nan=False),
        min_size=min_k, max_size=max_k,
    )


class TestNormalize:
    def test_proportional_scaling(self):
        assert np.allclose(normalize([2, 2, 0, 0]).probs, [0.5, 0.5, 0, 0])

    def test_symmetry(self):
        assert np.allclose(normalize([1, 1, 1, 1]).probs, [0.25] * 4)

    def test_all_zero_falls_back_to_uniform(self):
        assert np.allclose(normalize([0, 0, 0, 0]).probs, [0.25] * 4)

    def test_negative_entry_rejected(self):
        with pytest.raises(InvalidScoreError):
            normalize([1, -0.5, 0, 0])

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidScoreError):
            normalize([1, float("nan"), 0, 0])
        with pytest.raises(InvalidScoreError):
            normalize([1, float("inf"), 0, 0])

    @given(vectors())
    def test_idempotent(self, raw):
        once = normalize(raw)
        twice = normalize(once.probs)
        assert np.all(np.abs(once.probs - twice.probs) <= 1e-12)

    @given(vectors(), st.randoms(use_true_random=False))
    def test_permutation_equivariant(self, raw, rnd):
        perm = list(range(len(raw)))
        rnd.shuffle(perm)
        direct = normalize([raw[p] for p in perm]).probs
        permuted = normalize(raw).probs[perm]
        assert np.all(np.abs(direct - permuted) <= 1e-12)


class TestSmooth:
    def test_formula(self):
        eps = 1e-5
        d = smooth(Distribution(np.array([1.0, 0, 0, 0])), eps)
        expected = (np.array([1.0, 0, 0, 0]) + eps) / (1 + 4 * eps)
        assert np.allclose(d.probs, expected, atol=0, rtol=1e-15)
        assert d.probs[0] == pytest.approx(0.9999700012, abs=1e-9)
        assert d.probs[1] == pytest.approx(1e-5, rel=1e-3)

    def test_zero_epsilon_is_identity(self):
        d = Distribution(np.array([0.4, 0.3, 0.2, 0.1]))
        assert np.array_equal(smooth(d, 0.0).probs, d.probs)

    def test_uniform_is_fixed_point(self):
        u = Distribution.uniform(5)
        assert np.allclose(smooth(u, 0.37).probs, u.probs, atol=1e-15)

    def test_negative_epsilon_rejected(self):
        with pytest.raises(InvalidParameterError):
            smooth(Distribution.uniform(4), -1e-9)

    @given(vectors(), st.floats(min_value=0, max_value=1.0))
    def test_preserves_argmax(self, raw, eps):
        d = normalize(raw)
        assert argmax_choice(smooth(d, eps)) == argmax_choice(d)

    @given(vectors(), st.floats(min_value=0, max_value=1.0))
    def test_strictly_positive_for_positive_epsilon(self, raw, eps):
        if eps > 0:
            assert np.all(smooth(normalize(raw), eps).probs > 0)


class TestArgmaxChoice:
    def test_clear_winner(self):
        assert argmax_choice(Distribution(np.array([0.1, 0.7, 0.1, 0.1]))) == 1

    def test_tie_breaks_low(self):
        assert argmax_choice(Distribution(np.array([0.5, 0.5, 0, 0]))) == 0

    def test_uniform_returns_zero(self):
        assert argmax_choice(Distribution.uniform(4)) == 0


class TestDistribution:
    def test_rejects_negative(self):
        with pytest.raises(InvalidDistributionError):
            Distribution(np.array([1.1, -0.1, 0.0]))

    def test_rejects_zero_sum(self):
        with pytest.raises(InvalidDistributionError):
            Distribution(np.array([0.0, 0.0]))

    def test_renormalizes_off_tolerance_with_warning(self):
        with pytest.warns(UserWarning, match="renormalizing"):
            d = Distribution(np.array([0.5, 0.6]))
        assert d.probs.sum() == pytest.approx(1.0)

    def test_in_tolerance_kept_exactly(self):
        probs = np.array([0.25, 0.25, 0.25, 0.25])
        assert np.array_equal(Distribution(probs).probs, probs)

    def test_immutable(self):
        d = Distribution.uniform(3)
        with pytest.raises(ValueError):
            d.probs[0] = 0.9


class TestTokens:
    def test_casefold_and_strip(self):
        assert normalize_token("  Hidden,") == "hidden"
        assert normalize_token('"Veiled"') == "veiled"

    def test_wordtuple_arity(self):
        assert WordTuple.of("Cat").arity == 1
        assert WordTuple.of("cat", "meow").arity == 2
        with pytest.raises(InvalidParameterError):
            WordTuple(("a", "b", "c"))
        with pytest.raises(InvalidParameterError):
            WordTuple(("",))


def _instance(iid="q1", k=4, answer=1, arity=1):
    mk = lambda s: WordTuple(tuple(f"{s}{j}" for j in range(arity)))
    return Instance(iid, mk("stem"), tuple(mk(f"c{i}") for i in range(k)), answer)


class TestQuestionSet:
    def test_task_kind_inferred(self):
        qs = QuestionSet((_instance(),))
        assert qs.task_kind is TaskKind.SYNONYM
        qa = QuestionSet((_instance(arity=2),))
        assert qa.task_kind is TaskKind.ANALOGY

    def test_answer_range_checked(self):
        with pytest.raises(InvalidParameterError):
            _instance(answer=4)

    def test_mixed_k_rejected(self):
        with pytest.raises(ConsistencyError):
            QuestionSet((_instance("a", k=4), _instance("b", k=5)))

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ConsistencyError):
            QuestionSet((_instance("a"), _instance("a")))

    def test_choice_arity_must_match_stem(self):
        with pytest.raises(InvalidParameterError):
            Instance("q", WordTuple(("x",)),
                     (WordTuple(("a", "b")), WordTuple(("c", "d"))), 0)

    def test_answers_vector(self):
        qs = QuestionSet((_instance("a", answer=1), _instance("b", answer=3)))
        assert qs.answers().tolist() == [1, 3]


class TestForecastSet:
    def test_shape_and_access(self):
        probs = np.full((2, 3, 4), 0.25)
        fs = ForecastSet(("i1", "i2"), ("a", "b", "c"), probs)
        assert (fs.m, fs.n, fs.k) == (2, 3, 4)
        assert np.allclose(fs.distribution(0, 1).probs, [0.25] * 4)

    def test_rows_must_sum_to_one(self):
        probs = np.full((1, 1, 4), 0.3)
        with pytest.warns(UserWarning):
            fs = ForecastSet(("i",), ("a",), probs)
        assert fs.probs.sum() == pytest.approx(1.0)

    def test_negative_rejected(self):
        probs = np.full((1, 1, 4), 0.25)
        probs[0, 0, 0] = -0.25
        probs[0, 0, 1] = 0.75
        with pytest.raises(InvalidDistributionError):
            ForecastSet(("i",), ("a",), probs)

    def test_smoothed(self):
        probs = np.zeros((1, 1, 4))
        probs[0, 0, 0] = 1.0
        fs = ForecastSet(("i",), ("a",), probs).smoothed(1e-5)
        assert np.all(fs.probs > 0)
        assert fs.probs[0, 0].sum() == pytest.approx(1.0)

    def test_with_module_appends(self):
        fs = ForecastSet(("i",), ("a",), np.full((1, 1, 4), 0.25))
        extra = np.array([[0.7, 0.1, 0.1, 0.1]])
        grown = fs.with_module("b", extra)
        assert grown.module_ids == ("a", "b")
        assert np.allclose(grown.probs[0, 1], extra[0])

    def test_select_modules(self):
        probs = np.stack([np.full((2, 4), 0.25), np.tile([0.7, 0.1, 0.1, 0.1], (2, 1))], axis=1)
        fs = ForecastSet(("i1", "i2"), ("a", "b"), probs)
        sel = fs.select_modules(["b"])
        assert sel.module_ids == ("b",)
        assert np.allclose(sel.probs[:, 0, :], probs[:, 1, :])


class TestWeightVector:
    def test_box_constraints(self):
        WeightVector(Rule.MIXTURE, ("a",), np.array([1.0]))
        with pytest.raises(InvalidParameterError):
            WeightVector(Rule.MIXTURE, ("a",), np.array([1.5]))
        WeightVector(Rule.LOGARITHMIC, ("a",), np.array([7.0]))
        with pytest.raises(InvalidParameterError):
            WeightVector(Rule.LOGARITHMIC, ("a",), np.array([10.5]))
        with pytest.raises(InvalidParameterError):
            WeightVector(Rule.PRODUCT, ("a",), np.array([-0.1]))

    def test_aligned_to(self):
        wv = WeightVector(Rule.PRODUCT, ("a", "b"), np.array([0.2, 0.8]))
        flipped = wv.aligned_to(("b", "a"))
        assert flipped.weights.tolist() == [0.8, 0.2]
        with pytest.raises(ConsistencyError):
            wv.aligned_to(("a", "c"))

    def test_weight_of(self):
        wv = WeightVector(Rule.PRODUCT, ("a", "b"), np.array([0.2, 0.8]))
        assert wv.weight_of("b") == 0.8
        with pytest.raises(ConsistencyError):
            wv.weight_of("zzz")
