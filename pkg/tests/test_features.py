import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import TOY_RECORDS
from cqarank.embedding import FallbackEmbedder
from cqarank.errors import UnresolvableQid
from cqarank.features import (
    FEATURE_TABLE,
    NUM_FEATURES,
    QA_FEATURE_IDS,
    QQ_FEATURE_IDS,
    BM25Params,
    aggregate,
    answer_features,
    bm25,
    extract_dataset,
    extract_pair,
    feature_name,
    fmt_float,
    question_features,
    read_feature_table,
    tf_counts,
    tfidf_cosine,
    write_feature_table,
)
from cqarank.ingest import LinkJudgment, QARecord, corpus_index
from cqarank.stats import Stream, build_stats, idf
from cqarank.textprep import concat_answers, from_tokens, tokenize
from oracles import oracle_aggregates, oracle_all_features, oracle_dense_tfidf_cosine


def docs(*token_lists):
    return [from_tokens(t) for t in token_lists]


class TestFeatureTable:
    def test_ordering_and_stream_partition(self):
        assert len(FEATURE_TABLE) == NUM_FEATURES == 35
        assert [fid for fid, _, _ in FEATURE_TABLE] == list(range(1, 36))
        for fid, _, stream in FEATURE_TABLE:
            assert stream == ("question" if fid <= 21 else "answer")
        assert QQ_FEATURE_IDS == tuple(range(1, 22))
        assert QA_FEATURE_IDS == tuple(range(22, 36))

    def test_feature_name_suffix(self):
        assert feature_name(21) == "semantic_sim (Q)"
        assert feature_name(35) == "bm25 (A)"


class TestTfCounts:
    def test_counting(self):
        out = tf_counts(from_tokens(["a", "b"]), from_tokens(["a", "a", "c"]))
        assert out == [("a", 2), ("b", 0)]

    def test_empty_query(self):
        assert tf_counts(from_tokens([]), from_tokens(["a"])) == []

    def test_duplicate_query_terms_deduplicated(self):
        out = tf_counts(from_tokens(["a", "a"]), from_tokens(["a", "a", "a"]))
        assert out == [("a", 3)]


class TestAggregate:
    def test_hand_computed(self):
        a = aggregate([1, 2, 3])
        assert (a.sum, a.min, a.max, a.avg) == (6, 1, 3, 2)
        assert a.var == pytest.approx(2 / 3, abs=1e-15)

    def test_singleton(self):
        a = aggregate([5])
        assert (a.sum, a.min, a.max, a.avg, a.var) == (5, 5, 5, 5, 0)

    def test_empty_convention(self):
        a = aggregate([])
        assert (a.sum, a.min, a.max, a.avg, a.var) == (0, 0, 0, 0, 0)

    @given(st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=1, max_size=40))
    def test_order_statistics_and_variance_identity(self, values):
        a = aggregate(values)
        assert a.min <= a.avg + 1e-12
        assert a.avg <= a.max + 1e-12
        ex2 = sum(v * v for v in values) / len(values)
        assert a.var == pytest.approx(ex2 - a.avg**2, abs=1e-9)
        assert a.var >= -1e-12

    def test_matches_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            values = list(rng.normal(size=rng.integers(0, 12)))
            a = aggregate(values)
            expected = oracle_aggregates(values)
            np.testing.assert_allclose(
                [a.sum, a.min, a.max, a.avg, a.var], expected, atol=1e-12
            )


class TestBM25Params:
    def test_defaults_from_reference_setup(self):
        p = BM25Params()
        assert p.k1 == 1.2 and p.b == 0.75

    def test_validation(self):
        with pytest.raises(ValueError):
            BM25Params(k1=0.0)
        with pytest.raises(ValueError):
            BM25Params(b=1.5)


class TestBM25:
    def setup_method(self):
        # 3 docs; term 'x' in one doc, avdl = 2
        self.stats = build_stats(
            docs(["x", "x"], ["y", "z"], ["y", "y"]), Stream.QUESTION
        )
        self.params = BM25Params()

    def test_no_matching_terms_is_zero(self):
        assert bm25(from_tokens(["w"]), from_tokens(["y", "z"]), self.stats, self.params) == 0.0

    def test_hand_evaluated_single_term(self):
        # TF=2, len(d)=avdl=2: factor = 2*(k1+1)/(2 + k1) = 2.2*2/3.2 = 1.375
        score = bm25(from_tokens(["x"]), from_tokens(["x", "x"]), self.stats, self.params)
        assert score == pytest.approx(math.log(3 / 1) * 1.375, abs=1e-12)

    def test_empty_doc_is_zero(self):
        assert bm25(from_tokens(["x"]), from_tokens([]), self.stats, self.params) == 0.0

    def test_monotone_in_term_frequency(self):
        scores = []
        for tf in range(0, 6):
            doc = from_tokens(["x"] * tf + ["y"] * (6 - tf))
            scores.append(bm25(from_tokens(["x"]), doc, self.stats, self.params))
        assert all(b >= a for a, b in zip(scores, scores[1:]))


class TestTfidfCosine:
    def test_identical_token_lists(self):
        stats = build_stats(docs(["a", "b"], ["b"], ["c"], ["a"]), Stream.QUESTION)
        t = from_tokens(["a", "b"])
        assert tfidf_cosine(t, t, stats) == pytest.approx(1.0)

    def test_disjoint_vocabulary(self):
        stats = build_stats(docs(["a"], ["b"], ["c"], ["d"]), Stream.QUESTION)
        assert tfidf_cosine(from_tokens(["a"]), from_tokens(["b"]), stats) == 0.0

    def test_matches_dense_oracle(self):
        token_lists = [["a", "b"], ["a", "c"], ["b", "c", "c"], ["d"]]
        stats = build_stats(docs(*token_lists), Stream.QUESTION)
        df = {}
        for t in token_lists:
            for term in set(t):
                df[term] = df.get(term, 0) + 1
        got = tfidf_cosine(from_tokens(["a", "b"]), from_tokens(["a", "c"]), stats)
        expected = oracle_dense_tfidf_cosine(["a", "b"], ["a", "c"], df, 4)
        assert got == pytest.approx(expected, abs=1e-12)


def _toy_stats():
    q_docs = [tokenize(r.question) for r in TOY_RECORDS]
    a_docs = [tokenize(concat_answers(r.answer1, r.answer2)) for r in TOY_RECORDS]
    return (
        build_stats(q_docs, Stream.QUESTION),
        build_stats(a_docs, Stream.ANSWER),
    )


class TestStreamFeatures:
    def setup_method(self):
        self.stats_q, self.stats_a = _toy_stats()
        self.params = BM25Params()
        self.provider = FallbackEmbedder()
        self.corpus = corpus_index(TOY_RECORDS)

    def test_identical_question_self_similarity(self):
        text = TOY_RECORDS[0].question
        vals = question_features(text, text, self.stats_q, self.params, self.provider)
        assert len(vals) == 21
        assert vals[19] == pytest.approx(1.0)  # feature 20, TF-IDF cosine
        assert vals[20] == pytest.approx(1.0)  # feature 21, semantic similarity

    def test_normalized_tf_definition(self):
        # count 3 in a 10-token document feeds 0.3 into ids 6-10
        q = "alpha"
        doc = "alpha alpha alpha " + " ".join(f"w{i}" for i in range(7))
        stats = build_stats([tokenize(doc), tokenize("beta")], Stream.QUESTION)
        vals = question_features(q, doc, stats, self.params, self.provider)
        assert vals[5] == pytest.approx(0.3)  # sum over the single query term
        assert vals[7] == pytest.approx(0.3)  # max

    def test_empty_answer_gives_zero_block(self):
        vals = answer_features(
            TOY_RECORDS[0].question, "", self.stats_a, self.params
        )
        assert vals == [0.0] * 14

    def test_all_values_finite(self):
        for j_qid2 in ("2", "3", "4", "5"):
            fv = extract_pair(
                LinkJudgment("1", j_qid2, 0),
                self.corpus,
                self.stats_q,
                self.stats_a,
                self.params,
                self.provider,
            )
            assert np.all(np.isfinite(fv.values))

    def test_question_features_match_oracle(self):
        for qid1, qid2 in (("1", "2"), ("1", "5"), ("3", "4")):
            got = question_features(
                self.corpus[qid1].question,
                self.corpus[qid2].question,
                self.stats_q,
                self.params,
                self.provider,
            )
            expected = oracle_all_features(
                TOY_RECORDS, qid1, qid2, 1.2, 0.75, self.provider
            )[:21]
            np.testing.assert_allclose(got, expected, atol=1e-9)

    def test_answer_features_match_oracle(self):
        for qid1, qid2 in (("1", "2"), ("3", "5"), ("5", "1")):
            rec2 = self.corpus[qid2]
            got = answer_features(
                self.corpus[qid1].question,
                concat_answers(rec2.answer1, rec2.answer2),
                self.stats_a,
                self.params,
            )
            expected = oracle_all_features(
                TOY_RECORDS, qid1, qid2, 1.2, 0.75, self.provider
            )[21:]
            np.testing.assert_allclose(got, expected, atol=1e-9)

    def test_answer_stream_uses_its_own_avdl(self):
        # same doc scored against two stream builds with different avdl
        doc_tokens = ["x", "x", "y"]
        stats_short = build_stats(docs(["x"], ["y"]), Stream.ANSWER)  # avdl 1
        stats_long = build_stats(docs(["x"] * 6, ["y"] * 2), Stream.ANSWER)  # avdl 4
        q = from_tokens(["x"])
        d = from_tokens(doc_tokens)
        assert bm25(q, d, stats_short, self.params) != bm25(q, d, stats_long, self.params)


class TestExtractPair:
    def setup_method(self):
        self.stats_q, self.stats_a = _toy_stats()
        self.params = BM25Params()
        self.provider = FallbackEmbedder()
        self.corpus = corpus_index(TOY_RECORDS)

    def test_length_and_concatenation(self):
        fv = extract_pair(
            LinkJudgment("1", "2", 1),
            self.corpus,
            self.stats_q,
            self.stats_a,
            self.params,
            self.provider,
        )
        assert fv.values.size == 35
        assert fv.label == 1
        qf = question_features(
            self.corpus["1"].question,
            self.corpus["2"].question,
            self.stats_q,
            self.params,
            self.provider,
        )
        af = answer_features(
            self.corpus["1"].question,
            concat_answers(self.corpus["2"].answer1, self.corpus["2"].answer2),
            self.stats_a,
            self.params,
        )
        np.testing.assert_array_equal(fv.values, np.array(qf + af))

    def test_unresolvable(self):
        with pytest.raises(UnresolvableQid):
            extract_pair(
                LinkJudgment("1", "404", 0),
                self.corpus,
                self.stats_q,
                self.stats_a,
                self.params,
                self.provider,
            )

    def test_stream_separation(self):
        # answer edits leave ids 1-21 alone; question edits leave ids 22-35 alone
        base = extract_pair(
            LinkJudgment("1", "2", 1),
            self.corpus,
            self.stats_q,
            self.stats_a,
            self.params,
            self.provider,
        )
        modified_answers = dict(self.corpus)
        r2 = self.corpus["2"]
        modified_answers["2"] = QARecord(r2.qid, r2.question, "totally different", "text now")
        fv_a = extract_pair(
            LinkJudgment("1", "2", 1),
            modified_answers,
            self.stats_q,
            self.stats_a,
            self.params,
            self.provider,
        )
        np.testing.assert_array_equal(base.values[:21], fv_a.values[:21])
        assert not np.array_equal(base.values[21:], fv_a.values[21:])

        modified_question = dict(self.corpus)
        modified_question["2"] = QARecord(
            r2.qid, "a completely new question text", r2.answer1, r2.answer2
        )
        fv_q = extract_pair(
            LinkJudgment("1", "2", 1),
            modified_question,
            self.stats_q,
            self.stats_a,
            self.params,
            self.provider,
        )
        np.testing.assert_array_equal(base.values[21:], fv_q.values[21:])
        assert not np.array_equal(base.values[:21], fv_q.values[:21])

    def test_empty_answers_zero_answer_block_only(self):
        modified = dict(self.corpus)
        r2 = self.corpus["2"]
        modified["2"] = QARecord(r2.qid, r2.question, "", "")
        fv = extract_pair(
            LinkJudgment("1", "2", 1),
            modified,
            self.stats_q,
            self.stats_a,
            self.params,
            self.provider,
        )
        np.testing.assert_array_equal(fv.values[21:], np.zeros(14))
        assert np.any(fv.values[:21] != 0.0)

    def test_threaded_extraction_matches_sequential(self):
        judgments = [LinkJudgment("1", q, 0) for q in ("2", "3", "4", "5")]
        seq = extract_dataset(
            judgments, self.corpus, self.stats_q, self.stats_a, self.params, self.provider
        )
        par = extract_dataset(
            judgments,
            self.corpus,
            self.stats_q,
            self.stats_a,
            self.params,
            self.provider,
            threads=4,
        )
        for a, b in zip(seq, par):
            np.testing.assert_array_equal(a.values, b.values)

    def test_document_tf_scope_changes_tf_aggregates_only(self):
        fv_q = extract_pair(
            LinkJudgment("1", "3", 0),
            self.corpus,
            self.stats_q,
            self.stats_a,
            self.params,
            self.provider,
            tf_scope="query",
        )
        fv_d = extract_pair(
            LinkJudgment("1", "3", 0),
            self.corpus,
            self.stats_q,
            self.stats_a,
            self.params,
            self.provider,
            tf_scope="document",
        )
        # IDF aggregates, BM25, cosine and semantic similarity are unaffected
        untouched = [10, 11, 12, 13, 18, 19, 20, 26, 27, 28, 29, 34]
        np.testing.assert_array_equal(fv_q.values[untouched], fv_d.values[untouched])
        assert not np.array_equal(fv_q.values, fv_d.values)


class TestFeatureTableIO:
    def test_fmt_float_shortest_round_trip(self):
        for x in (0.0, -0.0, 1.0, 0.5, 1 / 3, 1e-17, -2.5e300, 123456789.0):
            assert float(fmt_float(x)) == x
        assert fmt_float(0.0) == "0"
        assert fmt_float(0.5) == "0.5"

    def test_round_trip(self, tmp_path):
        stats_q, stats_a = _toy_stats()
        judgments = [LinkJudgment("1", q, int(q == "2")) for q in ("2", "3", "4", "5")]
        vectors = extract_dataset(
            judgments,
            corpus_index(TOY_RECORDS),
            stats_q,
            stats_a,
            BM25Params(),
            FallbackEmbedder(),
        )
        path = str(tmp_path / "features.tsv")
        write_feature_table(vectors, path)
        back = read_feature_table(path)
        assert len(back) == len(vectors)
        for a, b in zip(vectors, back):
            assert (a.qid1, a.qid2, a.label) == (b.qid1, b.qid2, b.label)
            np.testing.assert_array_equal(a.values, b.values)
