"""End-to-end orchestration: ingest -> stats -> extract -> export -> train
-> evaluate -> importance, plus the feature-subset ablation harness.

Every run directory is stamped with the hash of its configuration so any
artifact can be traced back to the exact inputs that produced it. With
the fallback embedder the whole pipeline is deterministic: running the
same configuration twice produces bit-identical files.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field

from . import dataset as ds_mod
from . import features as feat_mod
from . import importance as imp_mod
from . import ingest as ingest_mod
from . import lambdamart as lm
from . import metrics as metrics_mod
from . import stats as stats_mod
from .embedding import make_provider
from .errors import ConfigError
from .features import QA_FEATURE_IDS, QQ_FEATURE_IDS, BM25Params
from .textprep import concat_answers, tokenize

logger = logging.getLogger(__name__)

FEATURE_SUBSETS: dict[str, tuple[int, ...]] = {
    "all": tuple(range(1, 36)),
    "qq_only": QQ_FEATURE_IDS,
    "qa_only": QA_FEATURE_IDS,
    "no_bert": tuple(i for i in range(1, 36) if i != 21),
}


@dataclass
class ExperimentConfig:
    corpus_path: str = ""
    judgments_path: str = ""
    train_split_path: str = ""
    dev_split_path: str = ""
    test_split_path: str = ""
    out_dir: str = "run"
    subset: str = "all"
    k1: float = 1.2
    b: float = 0.75
    eta: float = 0.3
    gamma: float = 1.0
    lambda_reg: float = 1.0
    min_child_weight: float = 0.1
    max_depth: int = 3
    num_rounds: int = 500
    sigma: float = 1.0
    ndcg_truncation: int = 10
    embedder: str = "fallback"
    endpoint: str = ""
    timeout: float = 30.0
    cache_dir: str = ""
    tf_scope: str = "query"
    threads: int = 0  # 0 = all available cores
    seed: int = 7
    per_query: bool = False

    def validate(self) -> None:
        if self.subset not in FEATURE_SUBSETS:
            raise ConfigError(
                f"unknown subset {self.subset!r}; choose from {sorted(FEATURE_SUBSETS)}"
            )
        if self.embedder not in ("fallback", "remote"):
            raise ConfigError(f"unknown embedder {self.embedder!r}")
        if self.embedder == "remote" and not self.endpoint:
            raise ConfigError("remote embedder requires --endpoint")
        if self.tf_scope not in ("query", "document"):
            raise ConfigError(f"unknown tf_scope {self.tf_scope!r}")
        try:
            BM25Params(self.k1, self.b)
            self.boost_params()
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def bm25_params(self) -> BM25Params:
        return BM25Params(k1=self.k1, b=self.b)

    def resolved_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def boost_params(self) -> lm.BoostParams:
        return lm.BoostParams(
            eta=self.eta,
            gamma=self.gamma,
            lambda_reg=self.lambda_reg,
            min_child_weight=self.min_child_weight,
            max_depth=self.max_depth,
            num_rounds=self.num_rounds,
            sigma=self.sigma,
            ndcg_truncation=self.ndcg_truncation,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class PipelineArtifacts:
    """Paths of everything a pipeline run wrote, plus the final report."""

    out_dir: str
    config_hash: str
    libsvm: dict[str, str] = field(default_factory=dict)
    model_path: str = ""
    report: metrics_mod.MetricReport | None = None
    importance: imp_mod.ImportanceReport | None = None


def _load_inputs(config: ExperimentConfig):
    records = ingest_mod.parse_corpus(config.corpus_path)
    corpus = ingest_mod.corpus_index(records)
    judgments, _ = ingest_mod.parse_judgments(config.judgments_path, corpus)
    split = ingest_mod.load_splits(
        config.train_split_path, config.dev_split_path, config.test_split_path
    )
    ingest_mod.split_coverage(judgments, split)
    return records, corpus, judgments, split


def build_stream_stats(records) -> tuple[stats_mod.CorpusStats, stats_mod.CorpusStats]:
    """Question-stream stats over question texts, answer-stream stats over
    concatenated-answer texts."""
    qdocs = [tokenize(r.question) for r in records]
    adocs = [tokenize(concat_answers(r.answer1, r.answer2)) for r in records]
    return (
        stats_mod.build_stats(qdocs, stats_mod.Stream.QUESTION),
        stats_mod.build_stats(adocs, stats_mod.Stream.ANSWER),
    )


def _stage(name: str):
    logger.info("stage: %s", name)


def run_pipeline(config: ExperimentConfig) -> PipelineArtifacts:
    """Run every stage and leave all artifacts under config.out_dir."""
    config.validate()
    os.makedirs(config.out_dir, exist_ok=True)
    chash = config.config_hash()
    out = PipelineArtifacts(out_dir=config.out_dir, config_hash=chash)

    with open(os.path.join(config.out_dir, "config.json"), "w", encoding="utf-8") as fh:
        json.dump({"config_hash": chash, "config": config.to_dict()}, fh, indent=2)

    _stage("ingest")
    records, corpus, judgments, split = _load_inputs(config)

    _stage("stats")
    stats_q, stats_a = build_stream_stats(records)
    stats_mod.save_stats(stats_q, os.path.join(config.out_dir, "question.stats.json"))
    stats_mod.save_stats(stats_a, os.path.join(config.out_dir, "answer.stats.json"))

    _stage("extract")
    provider = make_provider(
        config.embedder,
        endpoint=config.endpoint or None,
        timeout=config.timeout,
        cache_dir=config.cache_dir or None,
    )
    vectors = feat_mod.extract_dataset(
        judgments,
        corpus,
        stats_q,
        stats_a,
        config.bm25_params(),
        provider,
        tf_scope=config.tf_scope,
        threads=config.resolved_threads(),
    )
    feat_mod.write_feature_table(vectors, os.path.join(config.out_dir, "features.tsv"))

    _stage("export")
    subset_ids = FEATURE_SUBSETS[config.subset]
    datasets = {}
    for which in ("train", "dev", "test"):
        ds = ds_mod.build_dataset(vectors, split, which)
        if config.subset != "all":
            ds, mapping = ds_mod.mask_features(ds, subset_ids)
            ds_mod.write_feature_map(
                mapping, os.path.join(config.out_dir, f"{which}.libsvm.featmap")
            )
        path = os.path.join(config.out_dir, f"{which}.libsvm")
        ds_mod.write_libsvm(ds, path)
        datasets[which] = ds
        out.libsvm[which] = path

    _stage("train")
    result = lm.train(
        datasets["train"],
        datasets["dev"],
        config.boost_params(),
        log_path=os.path.join(config.out_dir, "training_log.tsv"),
    )
    out.model_path = os.path.join(config.out_dir, "model.json")
    lm.save_model(result.model, out.model_path)

    _stage("eval")
    ranked = lm.score(result.model, datasets["test"])
    report = metrics_mod.evaluate_rankings(lm.ranked_labels(ranked))
    metrics_mod.write_report_tsv(
        report, os.path.join(config.out_dir, "metrics.tsv"), per_query=config.per_query
    )
    metrics_mod.write_report_json(
        report, os.path.join(config.out_dir, "metrics.json"), per_query=config.per_query
    )
    out.report = report

    _stage("importance")
    imp = imp_mod.gain_importance(result.model)
    imp_mod.write_importance_tsv(imp, os.path.join(config.out_dir, "importance.tsv"))
    imp_mod.write_importance_plot_json(
        imp, os.path.join(config.out_dir, "importance.plot.json")
    )
    out.importance = imp

    # manifest ties every artifact in the run directory to the config hash
    artifacts = sorted(
        name
        for name in os.listdir(config.out_dir)
        if os.path.isfile(os.path.join(config.out_dir, name))
        and name != "run_manifest.json"
    )
    with open(
        os.path.join(config.out_dir, "run_manifest.json"), "w", encoding="utf-8"
    ) as fh:
        json.dump({"config_hash": chash, "artifacts": artifacts}, fh, indent=2)

    logger.info(
        "pipeline done: ndcg@10=%.4f map@10=%.4f (config %s)",
        report.ndcg10,
        report.map10,
        chash,
    )
    return out


def ablate_datasets(
    train_ds: ds_mod.RankingDataset,
    dev_ds: ds_mod.RankingDataset,
    test_ds: ds_mod.RankingDataset,
    params: lm.BoostParams,
    subsets: dict[str, tuple[int, ...]] | None = None,
) -> dict[str, metrics_mod.MetricReport]:
    """Train and evaluate one model per feature subset on shared splits."""
    subsets = subsets or FEATURE_SUBSETS
    results = {}
    for name, ids in subsets.items():
        tr, _ = ds_mod.mask_features(train_ds, ids)
        dv, _ = ds_mod.mask_features(dev_ds, ids)
        te, _ = ds_mod.mask_features(test_ds, ids)
        result = lm.train(tr, dv, params)
        ranked = lm.score(result.model, te)
        results[name] = metrics_mod.evaluate_rankings(lm.ranked_labels(ranked))
        logger.info(
            "ablation %s: ndcg@10=%.4f map@10=%.4f",
            name,
            results[name].ndcg10,
            results[name].map10,
        )
    return results


def write_ablation_tsv(results: dict[str, metrics_mod.MetricReport], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("subset\tmap@5\tmap@10\tndcg@5\tndcg@10\n")
        for name, report in results.items():
            fh.write(
                f"{name}\t{report.map5}\t{report.map10}\t{report.ndcg5}\t{report.ndcg10}\n"
            )


def run_ablation(config: ExperimentConfig) -> dict[str, metrics_mod.MetricReport]:
    """Extract features once, then train/evaluate each subset on shared splits."""
    config.validate()
    os.makedirs(config.out_dir, exist_ok=True)

    _stage("ingest")
    records, corpus, judgments, split = _load_inputs(config)
    _stage("stats")
    stats_q, stats_a = build_stream_stats(records)
    _stage("extract")
    provider = make_provider(
        config.embedder,
        endpoint=config.endpoint or None,
        timeout=config.timeout,
        cache_dir=config.cache_dir or None,
    )
    vectors = feat_mod.extract_dataset(
        judgments,
        corpus,
        stats_q,
        stats_a,
        config.bm25_params(),
        provider,
        tf_scope=config.tf_scope,
        threads=config.resolved_threads(),
    )
    datasets = {w: ds_mod.build_dataset(vectors, split, w) for w in ("train", "dev", "test")}

    _stage("ablate")
    results = ablate_datasets(
        datasets["train"], datasets["dev"], datasets["test"], config.boost_params()
    )
    write_ablation_tsv(results, os.path.join(config.out_dir, "ablation.tsv"))
    return results
