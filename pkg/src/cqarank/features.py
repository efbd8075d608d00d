"""The 35-dimensional feature vector for one (query, candidate QA) pair.

Features 1-21 compare the query question with the candidate's question
text ("question" stream); features 22-35 compare the query question with
the candidate's concatenated answers ("answer" stream). Each stream is
scored against its own corpus statistics. Index i of a vector carries
feature id i+1 of the table below.

Term-frequency aggregates range over the distinct terms of the query
(value = occurrences in the scored document, 0 when absent); IDF
aggregates range over the distinct terms of the scored document itself,
since they do not depend on the query. ``tf_scope="document"`` flips the
TF-based aggregates onto the document's own terms for sensitivity runs.
"""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embedding import EmbeddingProvider, cosine, semantic_similarity
from .errors import IoFailure, MalformedLine, UnresolvableQid
from .ingest import LinkJudgment, QARecord
from .stats import CorpusStats, idf
from .textprep import TokenizedText, concat_answers, tokenize

logger = logging.getLogger(__name__)

NUM_FEATURES = 35

# (feature id, short name, stream) in exported order
FEATURE_TABLE: tuple[tuple[int, str, str], ...] = (
    (1, "tf_sum", "question"),
    (2, "tf_min", "question"),
    (3, "tf_max", "question"),
    (4, "tf_avg", "question"),
    (5, "tf_var", "question"),
    (6, "norm_tf_sum", "question"),
    (7, "norm_tf_min", "question"),
    (8, "norm_tf_max", "question"),
    (9, "norm_tf_avg", "question"),
    (10, "norm_tf_var", "question"),
    (11, "idf_min", "question"),
    (12, "idf_max", "question"),
    (13, "idf_avg", "question"),
    (14, "idf_var", "question"),
    (15, "tfidf_min", "question"),
    (16, "tfidf_max", "question"),
    (17, "tfidf_avg", "question"),
    (18, "tfidf_var", "question"),
    (19, "bm25", "question"),
    (20, "tfidf_cosine", "question"),
    (21, "semantic_sim", "question"),
    (22, "norm_tf_sum", "answer"),
    (23, "norm_tf_min", "answer"),
    (24, "norm_tf_max", "answer"),
    (25, "norm_tf_avg", "answer"),
    (26, "norm_tf_var", "answer"),
    (27, "idf_min", "answer"),
    (28, "idf_max", "answer"),
    (29, "idf_avg", "answer"),
    (30, "idf_var", "answer"),
    (31, "tfidf_min", "answer"),
    (32, "tfidf_max", "answer"),
    (33, "tfidf_avg", "answer"),
    (34, "tfidf_var", "answer"),
    (35, "bm25", "answer"),
)

QQ_FEATURE_IDS = tuple(range(1, 22))
QA_FEATURE_IDS = tuple(range(22, 36))


def feature_name(feature_id: int) -> str:
    """Short name with Q/A stream suffix, e.g. 'semantic_sim (Q)'."""
    fid, name, stream = FEATURE_TABLE[feature_id - 1]
    return f"{name} ({'Q' if stream == 'question' else 'A'})"


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 <= 0:
            raise ValueError("k1 must be > 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must be in [0, 1]")


@dataclass(frozen=True)
class AggregateSet:
    """sum / min / max / mean / population variance of a value list."""

    sum: float
    min: float
    max: float
    avg: float
    var: float


@dataclass(frozen=True)
class FeatureVector:
    qid1: str
    qid2: str
    label: int
    values: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"non-finite feature for pair ({self.qid1}, {self.qid2})")


def aggregate(values: Sequence[float]) -> AggregateSet:
    """Empty input gives all-zero aggregates so features stay finite."""
    if not values:
        return AggregateSet(0.0, 0.0, 0.0, 0.0, 0.0)
    mean = statistics.fmean(values)
    return AggregateSet(
        sum=float(sum(values)),
        min=float(min(values)),
        max=float(max(values)),
        avg=mean,
        var=statistics.pvariance(values, mu=mean),
    )


def tf_counts(query: TokenizedText, doc: TokenizedText) -> list[tuple[str, int]]:
    """Occurrences in doc of each distinct query term, in first-seen order."""
    counts = Counter(doc.tokens)
    return [(term, counts[term]) for term in dict.fromkeys(query.tokens)]


def bm25(
    query: TokenizedText,
    doc: TokenizedText,
    stats: CorpusStats,
    params: BM25Params,
) -> float:
    """Okapi BM25 of doc for the distinct query terms.

    score = sum_t IDF(t) * TF(t) * (k1 + 1) / (TF(t) + k1 * (1 - b + b * len/avdl))
    """
    k1, b = params.k1, params.b
    length_norm = k1 * (1.0 - b + b * doc.length / stats.avdl)
    score = 0.0
    for term, count in tf_counts(query, doc):
        if count == 0:
            continue
        score += idf(stats, term) * count * (k1 + 1.0) / (count + length_norm)
    return score


def _norm_tf_idf_weights(doc: TokenizedText, stats: CorpusStats) -> dict[str, float]:
    if doc.length == 0:
        return {}
    counts = Counter(doc.tokens)
    return {t: (c / doc.length) * idf(stats, t) for t, c in counts.items()}


def tfidf_cosine(query: TokenizedText, doc: TokenizedText, stats: CorpusStats) -> float:
    """Cosine of sparse normalized-TF * IDF vectors over the union vocabulary."""
    wq = _norm_tf_idf_weights(query, stats)
    wd = _norm_tf_idf_weights(doc, stats)
    vocab = list(dict.fromkeys(list(wq) + list(wd)))
    u = np.array([wq.get(t, 0.0) for t in vocab], dtype=np.float64)
    v = np.array([wd.get(t, 0.0) for t in vocab], dtype=np.float64)
    if u.size == 0:
        return 0.0
    return cosine(u, v)


def _tf_aggregate_terms(query: TokenizedText, doc: TokenizedText, tf_scope: str) -> list[str]:
    if tf_scope == "query":
        return list(dict.fromkeys(query.tokens))
    if tf_scope == "document":
        return list(dict.fromkeys(doc.tokens))
    raise ValueError(f"unknown tf_scope {tf_scope!r}")


def _lexical_features(
    query: TokenizedText,
    doc: TokenizedText,
    stats: CorpusStats,
    params: BM25Params,
    tf_scope: str,
    with_raw_tf: bool,
) -> list[float]:
    """The shared lexical block: [raw TF x5,] norm TF x5, IDF x4, TF*IDF x4, BM25."""
    counts = Counter(doc.tokens)
    terms = _tf_aggregate_terms(query, doc, tf_scope)
    tfs = [float(counts[t]) for t in terms]
    if doc.length > 0:
        ntfs = [c / doc.length for c in tfs]
    else:
        ntfs = [0.0 for _ in tfs]
    doc_terms = list(dict.fromkeys(doc.tokens))
    idfs = [idf(stats, t) for t in doc_terms]
    tfidfs = [ntf * idf(stats, t) for t, ntf in zip(terms, ntfs)]

    out: list[float] = []
    if with_raw_tf:
        a = aggregate(tfs)
        out += [a.sum, a.min, a.max, a.avg, a.var]
    a = aggregate(ntfs)
    out += [a.sum, a.min, a.max, a.avg, a.var]
    a = aggregate(idfs)
    out += [a.min, a.max, a.avg, a.var]
    a = aggregate(tfidfs)
    out += [a.min, a.max, a.avg, a.var]
    out.append(bm25(query, doc, stats, params))
    return out


def question_features(
    qid1_text: str,
    qid2_text: str,
    qstats: CorpusStats,
    params: BM25Params,
    provider: EmbeddingProvider,
    tf_scope: str = "query",
) -> list[float]:
    """Feature ids 1-21: lexical block plus TF-IDF cosine and semantic similarity.

    Semantic similarity embeds the raw question texts, not the stemmed
    tokens, since sentence encoders expect natural sentences.
    """
    query = tokenize(qid1_text)
    doc = tokenize(qid2_text)
    out = _lexical_features(query, doc, qstats, params, tf_scope, with_raw_tf=True)
    out.append(tfidf_cosine(query, doc, qstats))
    out.append(semantic_similarity(provider, qid1_text, qid2_text))
    return out


def answer_features(
    qid1_text: str,
    answers_text: str,
    astats: CorpusStats,
    params: BM25Params,
    tf_scope: str = "query",
) -> list[float]:
    """Feature ids 22-35: lexical block against the concatenated answers."""
    query = tokenize(qid1_text)
    doc = tokenize(answers_text)
    return _lexical_features(query, doc, astats, params, tf_scope, with_raw_tf=False)


def extract_pair(
    judgment: LinkJudgment,
    corpus: Mapping[str, QARecord],
    stats_q: CorpusStats,
    stats_a: CorpusStats,
    params: BM25Params,
    provider: EmbeddingProvider,
    tf_scope: str = "query",
) -> FeatureVector:
    """Full 35-value vector for one judged pair; label copied from the judgment."""
    try:
        rec1 = corpus[judgment.qid1]
        rec2 = corpus[judgment.qid2]
    except KeyError as e:
        raise UnresolvableQid(e.args[0]) from e
    qf = question_features(rec1.question, rec2.question, stats_q, params, provider, tf_scope)
    af = answer_features(
        rec1.question,
        concat_answers(rec2.answer1, rec2.answer2),
        stats_a,
        params,
        tf_scope,
    )
    values = np.array(qf + af, dtype=np.float64)
    assert values.size == NUM_FEATURES
    return FeatureVector(
        qid1=judgment.qid1, qid2=judgment.qid2, label=judgment.label, values=values
    )


def extract_dataset(
    judgments: Iterable[LinkJudgment],
    corpus: Mapping[str, QARecord],
    stats_q: CorpusStats,
    stats_a: CorpusStats,
    params: BM25Params,
    provider: EmbeddingProvider,
    tf_scope: str = "query",
    threads: int = 1,
) -> list[FeatureVector]:
    """Extract every judged pair. Pure per pair, so extraction parallelizes
    across a thread pool; the embedding cache is internally synchronized."""
    judgments = list(judgments)
    if threads <= 1:
        return [
            extract_pair(j, corpus, stats_q, stats_a, params, provider, tf_scope)
            for j in judgments
        ]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(
            pool.map(
                lambda j: extract_pair(j, corpus, stats_q, stats_a, params, provider, tf_scope),
                judgments,
            )
        )


def fmt_float(x: float) -> str:
    """Shortest decimal that round-trips to the same float; integral values
    drop the trailing '.0' (so 0.0 serializes as '0')."""
    s = repr(float(x))
    if s.endswith(".0"):
        return s[:-2]
    return s


def write_feature_table(vectors: Sequence[FeatureVector], path: str) -> None:
    """Columnar intermediate file: qid1, qid2, label, then the feature values."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for v in vectors:
                cols = [v.qid1, v.qid2, str(v.label)]
                cols += [fmt_float(x) for x in v.values]
                fh.write("\t".join(cols) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write features to {path}: {e}") from e


def read_feature_table(path: str) -> list[FeatureVector]:
    vectors = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                cols = line.split("\t")
                if len(cols) < 4:
                    raise MalformedLine(line_no, f"expected >= 4 columns, got {len(cols)}")
                vectors.append(
                    FeatureVector(
                        qid1=cols[0],
                        qid2=cols[1],
                        label=int(cols[2]),
                        values=np.array([float(x) for x in cols[3:]], dtype=np.float64),
                    )
                )
    except OSError as e:
        raise IoFailure(f"cannot read features from {path}: {e}") from e
    return vectors
