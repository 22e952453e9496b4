import math

import numpy as np
import pytest

from mcpool.core import Instance, QuestionSet, WordTuple
from mcpool.errors import ConfigurationError, ConsistencyError, ResourceError
from mcpool.lexical import (
    CooccurrenceTable,
    DefinitionTable,
    EmbeddingTable,
    GraphPath,
    PhraseFrequencyTable,
    PhrasePatternSet,
    RelationDatabase,
    SnippetStore,
    SynonymLists,
    ThesaurusEdge,
    ThesaurusGraph,
    analogy_path_score,
    bfs_paths,
    build_module,
    connector_score,
    default_phrase_patterns,
    definition_similarity,
    embedding_similarity,
    path_similarity,
    phrase_vector,
    proximity_pmi,
    relation_filter,
    relation_similarity,
    run_module,
    run_modules,
    synonym_overlap,
)

from oracles import enumerate_shortest_paths


def analogy_instance(stem, choices, answer=0, iid="q"):
    return Instance(iid, WordTuple(tuple(stem)),
                    tuple(WordTuple(tuple(c)) for c in choices), answer)


def synonym_instance(stem, choices, answer=0, iid="q"):
    return Instance(iid, WordTuple((stem,)),
                    tuple(WordTuple((c,)) for c in choices), answer)


class TestEmbeddingSimilarity:
    table = EmbeddingTable({"a": np.array([1.0, 0.0]),
                            "b": np.array([1.0, 1.0]),
                            "c": np.array([0.0, 2.0])}, 2)

    def test_self_similarity(self):
        assert embedding_similarity(self.table, "a", "a") == pytest.approx(1.0)

    def test_orthogonal(self):
        assert embedding_similarity(self.table, "a", "c") == pytest.approx(0.0)

    def test_hand_cosine(self):
        got = embedding_similarity(self.table, "a", "b")
        assert got == pytest.approx(1 / math.sqrt(2), abs=1e-10)
        assert got == pytest.approx(0.7071, abs=1e-4)


class TestProximity:
    def test_engineered_half(self):
        # 7 windows of width 2; choice 'c' in 5, four of them free of "not",
        # and the stem joins it in exactly two of those four
        table = CooccurrenceTable.from_corpus(
            ["c", "s", "x", "s", "c", "y", "c", "not"], window_size=2)
        assert proximity_pmi(table, "s", "c") == pytest.approx(0.5)

    def test_matches_brute_force_enumeration(self, rng):
        vocab = ["s", "c", "x", "y", "not", "z"]
        for _ in range(25):
            size = int(rng.integers(4, 40))
            window = int(rng.integers(2, 6))
            tokens = [vocab[i] for i in rng.integers(0, len(vocab), size)]
            table = CooccurrenceTable.from_corpus(tokens, window_size=window)
            span = min(window, len(tokens))
            eligible = joint = 0
            for start in range(len(tokens) - span + 1):
                chunk = set(tokens[start:start + span])
                if "c" in chunk and "not" not in chunk:
                    eligible += 1
                    if "s" in chunk:
                        joint += 1
            expected = joint / eligible if eligible else 0.0
            assert proximity_pmi(table, "s", "c") == pytest.approx(expected)

    def test_absent_choice_scores_zero(self):
        table = CooccurrenceTable.from_corpus(["a", "b", "a"], window_size=2)
        assert proximity_pmi(table, "a", "zzz") == 0.0

    def test_not_window_excluded_from_both_counts(self):
        table = CooccurrenceTable.from_corpus(["s", "c", "not"], window_size=3)
        assert table.pair[frozenset(("s", "c"))] == 1
        assert table.pair_without_not.get(frozenset(("s", "c")), 0) == 0
        assert proximity_pmi(table, "s", "c") == 0.0

    def test_score_bounded_by_one(self, rng):
        tokens = [["a", "b", "w", "not"][i] for i in rng.integers(0, 4, 60)]
        table = CooccurrenceTable.from_corpus(tokens, window_size=4)
        assert 0.0 <= proximity_pmi(table, "a", "b") <= 1.0


class TestSynonymOverlap:
    def test_disjoint_scores_zero(self):
        lists = SynonymLists({"a": frozenset({"x"}), "b": frozenset({"y"})})
        assert synonym_overlap(lists, "a", "b") == 0.0

    def test_one_directional_listing(self):
        lists = SynonymLists({"stem": frozenset({"choice"})})
        assert synonym_overlap(lists, "stem", "choice") == 10.0

    def test_mutual_plus_shared(self):
        lists = SynonymLists({
            "stem": frozenset({"choice", "s1", "s2", "s3"}),
            "choice": frozenset({"stem", "s1", "s2", "s3"}),
        })
        assert synonym_overlap(lists, "stem", "choice") == 23.0

    def test_custom_points(self):
        lists = SynonymLists({"stem": frozenset({"choice"})})
        assert synonym_overlap(lists, "stem", "choice",
                               membership_points=2.0) == 2.0


class TestConnector:
    def test_empty_store(self):
        assert connector_score(SnippetStore({}), "a", "b") == 0.0

    def test_word_separator(self):
        store = SnippetStore({frozenset(("hidden", "veiled")):
                              ("hidden means veiled",)})
        assert connector_score(store, "hidden", "veiled") == 1.0

    def test_keyword_bonus(self):
        store = SnippetStore({frozenset(("hidden", "veiled")):
                              ("a thesaurus says hidden means veiled",)})
        assert connector_score(store, "hidden", "veiled") == 2.0

    def test_symbol_separator_and_reversed_order(self):
        store = SnippetStore({frozenset(("hidden", "veiled")):
                              ("veiled / hidden", "hidden, veiled")})
        assert connector_score(store, "hidden", "veiled") == 2.0

    def test_whitespace_separator(self):
        store = SnippetStore({frozenset(("dim", "dark")): ("dim dark night",)})
        assert connector_score(store, "dim", "dark") == 1.0


class TestPhraseVectors:
    patterns = default_phrase_patterns()

    def test_empty_table_gives_zero_vector(self):
        vec = phrase_vector(self.patterns, PhraseFrequencyTable({}), "a", "b")
        assert vec.shape == (128,)
        assert not np.any(vec)

    def test_log_of_frequency(self):
        table = PhraseFrequencyTable({"a for b": math.e - 1})
        vec = phrase_vector(self.patterns, table, "a", "b")
        idx = self.patterns.templates.index("X for Y")
        assert vec[idx] == pytest.approx(1.0)
        assert vec.sum() == pytest.approx(1.0)

    def test_direction_sensitive_signature(self):
        table = PhraseFrequencyTable({
            "traffic in the street": 120, "street with traffic": 40,
            "water in the riverbed": 18, "riverbed with water": 6,
        })
        r_ts = phrase_vector(self.patterns, table, "traffic", "street")
        r_wr = phrase_vector(self.patterns, table, "water", "riverbed")
        r_rw = phrase_vector(self.patterns, table, "riverbed", "water")
        assert relation_similarity(r_ts, r_wr) > 0.9
        assert relation_similarity(r_ts, r_rw) == pytest.approx(0.0, abs=1e-12)

    def test_pattern_file_shape(self):
        assert len(self.patterns.templates) == 128
        for t in self.patterns.templates:
            assert t.count("X") == 1 and t.count("Y") == 1
        # second half is the reversed form of the first half
        half = 64
        for base, rev in zip(self.patterns.templates[:half],
                             self.patterns.templates[half:]):
            swapped = rev.replace("X", "\x00").replace("Y", "X").replace("\x00", "Y")
            assert swapped == base

    def test_wrong_count_rejected(self):
        with pytest.raises(ResourceError):
            PhrasePatternSet(("X Y",))


class TestRelationSimilarity:
    def test_identical(self):
        r = np.array([1.0, 2.0, 0.0])
        assert relation_similarity(r, r) == pytest.approx(1.0)

    def test_disjoint_supports(self):
        assert relation_similarity(np.array([1.0, 0.0]),
                                   np.array([0.0, 1.0])) == 0.0

    def test_hand_cosine(self):
        r1 = np.zeros(4); r1[:2] = 1.0
        r2 = np.zeros(4); r2[0] = 1.0
        assert relation_similarity(r1, r2) == pytest.approx(0.7071, abs=1e-4)

    def test_zero_vector_defined_as_zero(self):
        assert relation_similarity(np.zeros(3), np.ones(3)) == 0.0


def edge(head, kind, tail, gloss=()):
    return ThesaurusEdge(head, kind, tail, tuple(gloss))


GLOSS_GRAPH = ThesaurusGraph((
    edge("evaporate", "gloss", "vapor", ("change", "into", "a", "vapor")),
    edge("petrify", "gloss", "stone", ("change", "into", "stone")),
    edge("melt", "gloss", "liquid", ("become", "a", "liquid")),
    edge("cat", "hypernym", "animal"),
    edge("dog", "hypernym", "animal"),
))


class TestBfsPaths:
    def test_same_word_has_no_paths(self):
        assert bfs_paths(GLOSS_GRAPH, "cat", "cat") == ()

    def test_single_gloss_link(self):
        paths = bfs_paths(GLOSS_GRAPH, "evaporate", "vapor")
        assert len(paths) == 1
        p = paths[0]
        assert p.direction == "forward"
        assert p.links == ("gloss",)
        assert {"change", "into", "vapor", "evaporate"} <= p.words

    def test_shorter_route_wins(self):
        g = ThesaurusGraph((
            edge("a", "synonym", "b"),
            edge("b", "synonym", "c"),
            edge("a", "hypernym", "x"),
            edge("x", "hyponym", "y"),
            edge("y", "synonym", "c"),
        ))
        paths = bfs_paths(g, "a", "c")
        assert len(paths) == 1
        assert paths[0].links == ("synonym", "synonym")

    def test_both_directions_reported(self):
        g = ThesaurusGraph((
            edge("a", "synonym", "b"),
            edge("b", "antonym", "a"),
        ))
        paths = bfs_paths(g, "a", "b")
        assert {p.direction for p in paths} == {"forward", "backward"}

    def test_link_budget_respected(self):
        g = ThesaurusGraph((
            edge("a", "synonym", "b"),
            edge("b", "synonym", "c"),
            edge("c", "synonym", "d"),
            edge("d", "synonym", "e"),
        ))
        assert bfs_paths(g, "a", "e") == ()
        assert len(bfs_paths(g, "a", "d")) == 1

    def test_matches_exhaustive_enumeration_on_random_graphs(self, rng):
        kinds = ("hypernym", "hyponym", "synonym", "antonym", "stem", "gloss")
        for round_no in range(50):
            n_nodes = int(rng.integers(3, 51))
            nodes = [f"w{i}" for i in range(n_nodes)]
            edges = []
            for _ in range(int(rng.integers(n_nodes, 3 * n_nodes))):
                head, tail = rng.choice(n_nodes, size=2, replace=False)
                kind = kinds[rng.integers(0, len(kinds))]
                gloss = ("about", nodes[tail]) if kind == "gloss" else ()
                edges.append(edge(nodes[head], kind, nodes[tail], gloss))
            graph = ThesaurusGraph(tuple(edges))
            x, y = (nodes[i] for i in rng.choice(n_nodes, size=2, replace=False))
            got = bfs_paths(graph, x, y)
            for src, dst, direction in ((x, y, "forward"), (y, x, "backward")):
                expected = enumerate_shortest_paths(graph.adjacency, src, dst, 3)
                mine = {tuple(zip(p.links, p.nodes[1:]))
                        for p in got if p.direction == direction}
                theirs = {tuple((e.kind, e.tail) for e in p) for p in expected}
                assert mine == theirs, f"round {round_no}: {direction} mismatch"


class TestPathSimilarity:
    def test_published_gloss_example_scores_four(self):
        p = bfs_paths(GLOSS_GRAPH, "evaporate", "vapor")[0]
        q = bfs_paths(GLOSS_GRAPH, "petrify", "stone")[0]
        # one shared link kind + same direction + shared "change", "into"
        assert path_similarity(p, q) == 4.0

    def test_disjoint_opposite_paths_score_zero(self):
        p = GraphPath("forward", ("synonym",), ("a", "b"))
        q = GraphPath("backward", ("antonym",), ("c", "d"))
        assert path_similarity(p, q) == 0.0

    def test_direction_only(self):
        p = GraphPath("forward", ("synonym",), ("a", "b"))
        q = GraphPath("forward", ("antonym",), ("c", "d"))
        assert path_similarity(p, q) == 1.0

    def test_symmetric(self):
        p = bfs_paths(GLOSS_GRAPH, "evaporate", "vapor")[0]
        q = bfs_paths(GLOSS_GRAPH, "melt", "liquid")[0]
        assert path_similarity(p, q) == path_similarity(q, p)


class TestAnalogyPathScore:
    def test_no_stem_paths_gives_uniform(self):
        inst = analogy_instance(("zz", "qq"), [("cat", "animal"), ("dog", "animal")])
        assert np.allclose(analogy_path_score(GLOSS_GRAPH, inst).probs, 0.5)

    def test_single_scorable_choice_takes_all_mass(self):
        inst = analogy_instance(("evaporate", "vapor"),
                                [("petrify", "stone"), ("zz", "qq")])
        probs = analogy_path_score(GLOSS_GRAPH, inst).probs
        assert np.allclose(probs, [1.0, 0.0])

    def test_matching_gloss_pair_ranks_top(self):
        inst = analogy_instance(
            ("evaporate", "vapor"),
            [("petrify", "stone"), ("cat", "animal"), ("dog", "animal")])
        probs = analogy_path_score(GLOSS_GRAPH, inst).probs
        assert np.argmax(probs) == 0


DB = RelationDatabase({
    "hypernym": frozenset({("dog", "animal"), ("cat", "animal"), ("oak", "tree")}),
    "antonym": frozenset({("hot", "cold")}),
    "synonym": frozenset({("dog", "hound")}),
})


class TestRelationFilter:
    def test_stem_not_in_relation_gives_uniform(self):
        inst = analogy_instance(("hot", "cold"),
                                [("a", "b"), ("c", "d"), ("e", "f"),
                                 ("g", "h"), ("i", "j")])
        probs = relation_filter(DB, "hypernym", inst).probs
        assert np.allclose(probs, 0.2)

    def test_matching_choices_split_mass(self):
        inst = analogy_instance(
            ("dog", "animal"),
            [("a", "b"), ("cat", "animal"), ("c", "d"), ("oak", "tree"), ("e", "f")])
        probs = relation_filter(DB, "hypernym", inst).probs
        assert np.allclose(probs, [0, 0.5, 0, 0.5, 0])

    def test_no_matching_choice_gives_uniform(self):
        inst = analogy_instance(("dog", "animal"), [("a", "b"), ("c", "d")])
        probs = relation_filter(DB, "hypernym", inst).probs
        assert np.allclose(probs, 0.5)

    def test_suffix_stripping_matches_plural(self):
        inst = analogy_instance(("dogs", "animals"), [("cats", "animals"), ("a", "b")])
        probs = relation_filter(DB, "hypernym", inst).probs
        assert np.allclose(probs, [1.0, 0.0])

    def test_synonym_expansion(self):
        inst = analogy_instance(("hound", "animal"), [("cat", "animal"), ("a", "b")])
        assert np.allclose(relation_filter(DB, "hypernym", inst).probs, [1.0, 0.0])
        assert np.allclose(relation_filter(DB, "hypernym", inst, expand=False).probs,
                           0.5)


class TestDefinitionSimilarity:
    table = DefinitionTable({
        "evaporate": ("change", "into", "a", "vapor"),
        "petrify": ("change", "into", "stone"),
        "vapor": ("water", "gas"),
        "stone": ("hard", "matter"),
        "melt": ("warm", "up"),
        "liquid": ("flowing", "matter"),
    })

    def test_no_definitions_gives_uniform(self):
        inst = analogy_instance(("qq", "zz"), [("aa", "bb"), ("cc", "dd")])
        assert np.allclose(definition_similarity(self.table, inst).probs, 0.5)

    def test_identical_definitions_dominate(self):
        table = DefinitionTable({"a": ("x", "y"), "b": ("p", "q"),
                                 "c": ("x", "y"), "d": ("p", "q")})
        inst = analogy_instance(("a", "b"), [("c", "d"), ("qq", "zz")])
        probs = definition_similarity(table, inst).probs
        assert np.allclose(probs, [1.0, 0.0])

    def test_hand_computed_three_choices(self):
        inst = analogy_instance(
            ("evaporate", "vapor"),
            [("petrify", "stone"), ("melt", "liquid"), ("qq", "zz")])
        probs = definition_similarity(self.table, inst).probs

        def cos(u, v):
            shared = set(u) & set(v)
            return (sum(u.count(t) * v.count(t) for t in shared)
                    / math.sqrt(sum(c * c for c in map(u.count, set(u)))
                                * sum(c * c for c in map(v.count, set(v)))))
        d = self.table.tokens
        raw = [
            cos(d("evaporate"), d("petrify")) + cos(d("vapor"), d("stone")),
            cos(d("evaporate"), d("melt")) + cos(d("vapor"), d("liquid")),
            0.0,
        ]
        assert np.allclose(probs, np.array(raw) / sum(raw))


class TestRunModule:
    def test_all_abstain_gives_uniform_everywhere(self):
        from mcpool.lexical.modules import _embedding_module

        table = EmbeddingTable({"other": np.array([1.0, 0.0])}, 2)
        module = _embedding_module("emb", table)
        questions = QuestionSet((
            synonym_instance("a", ["b", "c"], iid="q1"),
            synonym_instance("d", ["e", "f"], iid="q2"),
        ))
        for dist in run_module(module, questions):
            assert np.allclose(dist.probs, 0.5)

    def test_raw_scores_are_normalized(self):
        lists = SynonymLists({"stem": frozenset({"x", "y"}),
                              "x": frozenset({"stem"}),
                              "y": frozenset()})
        from mcpool.lexical.modules import _synonym_overlap_module

        module = _synonym_overlap_module("syn", lists, 10.0, 1.0)
        questions = QuestionSet((synonym_instance("stem", ["x", "y"], iid="q1"),))
        [dist] = run_module(module, questions)
        # x: listed both ways = 20; y: listed one way = 10
        assert np.allclose(dist.probs, [2 / 3, 1 / 3])

    def test_distribution_outputs_pass_through(self):
        from mcpool.lexical.modules import _relation_module

        module = _relation_module("rel", DB, "hypernym", True)
        questions = QuestionSet((
            analogy_instance(("dog", "animal"), [("cat", "animal"), ("a", "b")],
                             iid="q1"),
        ))
        [dist] = run_module(module, questions)
        assert np.allclose(dist.probs, [1.0, 0.0])

    def test_task_mismatch_rejected(self):
        from mcpool.lexical.modules import _relation_module

        module = _relation_module("rel", DB, "hypernym", True)
        questions = QuestionSet((synonym_instance("a", ["b", "c"]),))
        with pytest.raises(ConsistencyError):
            run_module(module, questions)


class TestResourceLoading:
    def test_full_synonym_stack_from_fixtures(self, fixtures_dir):
        modules = [
            build_module("lsa", "embedding",
                         {"vectors": "embeddings.txt"}, fixtures_dir),
            build_module("pmi", "proximity",
                         {"cooccurrence": "cooc.tsv"}, fixtures_dir),
            build_module("thesaurus", "synonym-overlap",
                         {"lists": "synlists.tsv"}, fixtures_dir),
            build_module("connector", "connector",
                         {"snippets": "snippets.tsv"}, fixtures_dir),
        ]
        from mcpool.formats import load_questions

        questions = load_questions(fixtures_dir / "questions_synonym.jsonl")
        forecasts = run_modules(modules, questions)
        assert (forecasts.m, forecasts.n, forecasts.k) == (3, 4, 4)
        assert np.allclose(forecasts.probs.sum(axis=2), 1.0)
        # "hidden" question: thesaurus overlap makes "veiled" the clear pick
        h = questions.ids.index("syn1")
        i = forecasts.module_ids.index("thesaurus")
        assert int(np.argmax(forecasts.probs[h, i])) == 1

    def test_fixture_hand_values(self, fixtures_dir):
        lists = SynonymLists.load(fixtures_dir / "synlists.tsv")
        assert synonym_overlap(lists, "hidden", "veiled") == 22.0
        store = SnippetStore.load(fixtures_dir / "snippets.tsv")
        assert connector_score(store, "hidden", "veiled") == 3.0
        cooc = CooccurrenceTable.load(fixtures_dir / "cooc.tsv")
        assert proximity_pmi(cooc, "hidden", "veiled") == pytest.approx(3 / 4)
        emb = EmbeddingTable.load(fixtures_dir / "embeddings.txt")
        assert embedding_similarity(emb, "hidden", "veiled") == pytest.approx(
            0.7071, abs=1e-4)

    def test_missing_file_raises_resource_error(self, fixtures_dir, tmp_path):
        with pytest.raises(ResourceError, match="no_such"):
            build_module("m", "embedding", {"vectors": "no_such.txt"}, tmp_path)

    def test_unknown_kind_rejected(self, fixtures_dir):
        with pytest.raises(ConfigurationError, match="unknown kind"):
            build_module("m", "mystery", {}, fixtures_dir)

    def test_unknown_relation_rejected(self, fixtures_dir):
        with pytest.raises(ConfigurationError):
            build_module("m", "relation",
                         {"relations": "relations.tsv", "relation": "frenemy"},
                         fixtures_dir)

    def test_graph_self_loop_rejected(self):
        with pytest.raises(ResourceError):
            ThesaurusEdge("a", "synonym", "a")

    def test_graph_unknown_kind_rejected(self):
        with pytest.raises(ResourceError):
            ThesaurusEdge("a", "sibling", "b")

    def test_bad_embedding_dimension_rejected(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("a 1 0\nb 1 0 0\n")
        with pytest.raises(ResourceError, match="dimension"):
            EmbeddingTable.load(path)

    def test_analogy_stack_from_fixtures(self, fixtures_dir):
        from mcpool.formats import load_module_config, load_questions

        modules = load_module_config(fixtures_dir / "modules_analogy.conf")
        questions = load_questions(fixtures_dir / "questions_analogy.jsonl")
        forecasts = run_modules(modules, questions)
        assert (forecasts.m, forecasts.n) == (3, 5)
        assert np.allclose(forecasts.probs.sum(axis=2), 1.0)
