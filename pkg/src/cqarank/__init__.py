"""Learning-to-rank toolkit for community question answering.

The pipeline: parse a QA corpus and its duplicate-link judgments, build
per-stream lexical statistics, extract a 35-feature vector per judged
pair (question-question and question-answer streams plus an
embedding-based semantic similarity), export LibSVM ranking files, train
a LambdaMART model, evaluate with NDCG/MAP, and attribute gain-based
feature importance. A feature-subset ablation harness compares the full
vector against question-only, answer-only, and no-semantic-similarity
configurations.
"""

from .dataset import (
    RankingDataset,
    build_dataset,
    group_vectors,
    mask_features,
    read_libsvm,
    write_libsvm,
)
from .embedding import (
    FallbackEmbedder,
    RemoteEmbedder,
    cosine,
    make_provider,
    semantic_similarity,
)
from .features import (
    FEATURE_TABLE,
    NUM_FEATURES,
    AggregateSet,
    BM25Params,
    FeatureVector,
    aggregate,
    answer_features,
    bm25,
    extract_dataset,
    extract_pair,
    question_features,
    tf_counts,
    tfidf_cosine,
)
from .importance import (
    ImportanceReport,
    SplitStats,
    auxiliary_importance,
    gain_importance,
    split_gain,
)
from .ingest import (
    LinkJudgment,
    QARecord,
    QuerySplit,
    load_splits,
    parse_corpus,
    parse_judgments,
)
from .lambdamart import (
    BoostParams,
    RankModel,
    TrainResult,
    TreeNode,
    fit_tree,
    lambda_gradients,
    load_model,
    pair_gradients,
    save_model,
    score,
    train,
)
from .metrics import MetricReport, evaluate_rankings, map_at_k, ndcg_at_k
from .pipeline import (
    FEATURE_SUBSETS,
    ExperimentConfig,
    ablate_datasets,
    run_ablation,
    run_pipeline,
)
from .stats import CorpusStats, Stream, build_stats, idf, load_stats, save_stats
from .textprep import TokenizedText, concat_answers, tokenize

__version__ = "0.1.0"
