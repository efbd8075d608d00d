"""Command-line front end.

Subcommands mirror the pipeline stages (``ingest``, ``stats``,
``extract``, ``export``, ``train``, ``eval``, ``importance``) plus the
composites ``pipeline`` and ``ablate``. Options may come from a JSON
config file (``--config``) with individual flags taking precedence.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 remote-embedding failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys

from . import dataset as ds_mod
from . import features as feat_mod
from . import importance as imp_mod
from . import ingest as ingest_mod
from . import lambdamart as lm
from . import metrics as metrics_mod
from . import pipeline as pipe
from . import stats as stats_mod
from .embedding import make_provider
from .errors import (
    ConfigError,
    CqaRankError,
    RemoteUnavailable,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_REMOTE = 4


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--corpus", dest="corpus_path")
    parser.add_argument("--judgments", dest="judgments_path")
    parser.add_argument("--train-split", dest="train_split_path")
    parser.add_argument("--dev-split", dest="dev_split_path")
    parser.add_argument("--test-split", dest="test_split_path")
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--subset", choices=sorted(pipe.FEATURE_SUBSETS))
    parser.add_argument("--embedder", choices=["fallback", "remote"])
    parser.add_argument("--endpoint")
    parser.add_argument("--timeout", type=float)
    parser.add_argument("--cache-dir", dest="cache_dir")
    parser.add_argument("--tf-scope", dest="tf_scope", choices=["query", "document"])
    parser.add_argument("--k1", type=float)
    parser.add_argument("--b", type=float)
    parser.add_argument("--eta", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--lambda-reg", dest="lambda_reg", type=float)
    parser.add_argument("--min-child-weight", dest="min_child_weight", type=float)
    parser.add_argument("--max-depth", dest="max_depth", type=int)
    parser.add_argument("--num-rounds", dest="num_rounds", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--per-query", dest="per_query", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqarank",
        description="Learning-to-rank pipeline for community question answering",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("ingest", "parse corpus/judgments/splits and report counts"),
        ("stats", "build and save per-stream corpus statistics"),
        ("extract", "compute the 35-feature table for all judged pairs"),
        ("export", "write per-split LibSVM ranking files"),
        ("train", "train a LambdaMART model from exported LibSVM files"),
        ("eval", "score a LibSVM file with a model and report metrics"),
        ("importance", "aggregate gain-based feature importance from a model"),
        ("pipeline", "run all stages end to end"),
        ("ablate", "run the four feature-subset experiments"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "train":
            p.add_argument("--train-libsvm", required=False)
            p.add_argument("--dev-libsvm", required=False)
        if name == "eval":
            p.add_argument("--model", required=False)
            p.add_argument("--data-libsvm", required=False)
        if name == "importance":
            p.add_argument("--model", required=False)
            p.add_argument(
                "--aux-mode", choices=["regression", "classification"], default=None
            )
    return parser


# environment fallbacks for the embedding client; flags and config file win
_ENV_KEYS = {
    "endpoint": "CQARANK_ENDPOINT",
    "timeout": "CQARANK_TIMEOUT",
    "cache_dir": "CQARANK_CACHE_DIR",
}


def _config_from_args(args: argparse.Namespace) -> pipe.ExperimentConfig:
    base: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in {args.config}: {e}") from e
    for key, env_name in _ENV_KEYS.items():
        if key not in base and env_name in os.environ:
            value = os.environ[env_name]
            base[key] = float(value) if key == "timeout" else value
    config = pipe.ExperimentConfig.from_dict(base)
    for key in pipe.ExperimentConfig.__dataclass_fields__:
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    config.validate()
    return config


def _require(config: pipe.ExperimentConfig, *fields: str) -> None:
    for name in fields:
        if not getattr(config, name):
            flag = "--" + name.replace("_path", "").replace("_", "-")
            raise ConfigError(f"missing required option {flag}")


def _cmd_ingest(config: pipe.ExperimentConfig, args) -> int:
    _require(
        config,
        "corpus_path",
        "judgments_path",
        "train_split_path",
        "dev_split_path",
        "test_split_path",
    )
    records = ingest_mod.parse_corpus(config.corpus_path)
    corpus = ingest_mod.corpus_index(records)
    judgments, report = ingest_mod.parse_judgments(config.judgments_path, corpus)
    split = ingest_mod.load_splits(
        config.train_split_path, config.dev_split_path, config.test_split_path
    )
    coverage = ingest_mod.split_coverage(judgments, split)
    summary = {
        "corpus_records": len(records),
        "judgments": report.kept,
        "dropped_unresolvable": report.dropped_unresolvable,
        "dropped_self_links": report.dropped_self_links,
        "modal_group_size": report.modal_group_size(),
        "group_size_histogram": dict(sorted(report.group_sizes.items())),
        "splits": {
            "train": len(split.train),
            "dev": len(split.dev),
            "test": len(split.test),
        },
        "coverage": coverage,
    }
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, "ingest_report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_stats(config: pipe.ExperimentConfig, args) -> int:
    _require(config, "corpus_path")
    records = ingest_mod.parse_corpus(config.corpus_path)
    stats_q, stats_a = pipe.build_stream_stats(records)
    os.makedirs(config.out_dir, exist_ok=True)
    stats_mod.save_stats(stats_q, os.path.join(config.out_dir, "question.stats.json"))
    stats_mod.save_stats(stats_a, os.path.join(config.out_dir, "answer.stats.json"))
    print(
        f"question stream: N={stats_q.n_docs} avdl={stats_q.avdl:.2f}; "
        f"answer stream: N={stats_a.n_docs} avdl={stats_a.avdl:.2f}"
    )
    return EXIT_OK


def _cmd_extract(config: pipe.ExperimentConfig, args) -> int:
    _require(config, "corpus_path", "judgments_path")
    records = ingest_mod.parse_corpus(config.corpus_path)
    corpus = ingest_mod.corpus_index(records)
    judgments, _ = ingest_mod.parse_judgments(config.judgments_path, corpus)
    stats_q, stats_a = pipe.build_stream_stats(records)
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
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, "features.tsv")
    feat_mod.write_feature_table(vectors, path)
    print(f"wrote {len(vectors)} feature rows to {path}")
    return EXIT_OK


def _cmd_export(config: pipe.ExperimentConfig, args) -> int:
    _require(config, "train_split_path", "dev_split_path", "test_split_path")
    features_path = os.path.join(config.out_dir, "features.tsv")
    if not os.path.exists(features_path):
        raise ConfigError(f"{features_path} not found; run `cqarank extract` first")
    vectors = feat_mod.read_feature_table(features_path)
    split = ingest_mod.load_splits(
        config.train_split_path, config.dev_split_path, config.test_split_path
    )
    subset_ids = pipe.FEATURE_SUBSETS[config.subset]
    for which in ("train", "dev", "test"):
        ds = ds_mod.build_dataset(vectors, split, which)
        if config.subset != "all":
            ds, mapping = ds_mod.mask_features(ds, subset_ids)
            ds_mod.write_feature_map(
                mapping, os.path.join(config.out_dir, f"{which}.libsvm.featmap")
            )
        path = os.path.join(config.out_dir, f"{which}.libsvm")
        ds_mod.write_libsvm(ds, path)
        print(f"{which}: {len(ds.groups)} groups, {ds.n_rows} rows -> {path}")
    return EXIT_OK


def _cmd_train(config: pipe.ExperimentConfig, args) -> int:
    train_path = args.train_libsvm or os.path.join(config.out_dir, "train.libsvm")
    dev_path = args.dev_libsvm or os.path.join(config.out_dir, "dev.libsvm")
    train_ds = ds_mod.read_libsvm(train_path)
    dev_ds = ds_mod.read_libsvm(dev_path)
    os.makedirs(config.out_dir, exist_ok=True)
    result = lm.train(
        train_ds,
        dev_ds,
        config.boost_params(),
        log_path=os.path.join(config.out_dir, "training_log.tsv"),
    )
    model_path = os.path.join(config.out_dir, "model.json")
    lm.save_model(result.model, model_path)
    print(
        f"model from round {result.best_round + 1} "
        f"(dev ndcg@10={result.best_dev_ndcg10:.4f}) -> {model_path}"
    )
    return EXIT_OK


def _cmd_eval(config: pipe.ExperimentConfig, args) -> int:
    model_path = args.model or os.path.join(config.out_dir, "model.json")
    data_path = args.data_libsvm or os.path.join(config.out_dir, "test.libsvm")
    model = lm.load_model(model_path)
    ds = ds_mod.read_libsvm(data_path)
    ranked = lm.score(model, ds)
    report = metrics_mod.evaluate_rankings(lm.ranked_labels(ranked))
    os.makedirs(config.out_dir, exist_ok=True)
    metrics_mod.write_report_tsv(
        report, os.path.join(config.out_dir, "metrics.tsv"), per_query=config.per_query
    )
    metrics_mod.write_report_json(
        report, os.path.join(config.out_dir, "metrics.json"), per_query=config.per_query
    )
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def _cmd_importance(config: pipe.ExperimentConfig, args) -> int:
    model_path = args.model or os.path.join(config.out_dir, "model.json")
    os.makedirs(config.out_dir, exist_ok=True)
    if args.aux_mode:
        train_path = os.path.join(config.out_dir, "train.libsvm")
        ds = ds_mod.read_libsvm(train_path)
        report = imp_mod.auxiliary_importance(ds, args.aux_mode, config.boost_params())
        out_path = os.path.join(config.out_dir, f"importance.{args.aux_mode}.tsv")
    else:
        model = lm.load_model(model_path)
        report = imp_mod.gain_importance(model)
        out_path = os.path.join(config.out_dir, "importance.tsv")
    imp_mod.write_importance_tsv(report, out_path)
    imp_mod.write_importance_plot_json(report, out_path.replace(".tsv", ".plot.json"))
    for e in report.top(10):
        print(f"{e.feature_id:>3} {e.name:<22} share={e.share:.3f} splits={e.split_count}")
    return EXIT_OK


def _cmd_pipeline(config: pipe.ExperimentConfig, args) -> int:
    _require(
        config,
        "corpus_path",
        "judgments_path",
        "train_split_path",
        "dev_split_path",
        "test_split_path",
    )
    artifacts = pipe.run_pipeline(config)
    print(json.dumps(artifacts.report.to_dict(), indent=2))
    return EXIT_OK


def _cmd_ablate(config: pipe.ExperimentConfig, args) -> int:
    _require(
        config,
        "corpus_path",
        "judgments_path",
        "train_split_path",
        "dev_split_path",
        "test_split_path",
    )
    results = pipe.run_ablation(config)
    for name, report in results.items():
        print(
            f"{name:<8} map@5={report.map5:.4f} map@10={report.map10:.4f} "
            f"ndcg@5={report.ndcg5:.4f} ndcg@10={report.ndcg10:.4f}"
        )
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "stats": _cmd_stats,
    "extract": _cmd_extract,
    "export": _cmd_export,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "importance": _cmd_importance,
    "pipeline": _cmd_pipeline,
    "ablate": _cmd_ablate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _config_from_args(args)
        random.seed(config.seed)
        logger.info("seed=%d config_hash=%s", config.seed, config.config_hash())
        return _COMMANDS[args.command](config, args)
    except ConfigError as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG
    except RemoteUnavailable as e:
        logger.error("remote embedding failure: %s", e)
        return EXIT_REMOTE
    except CqaRankError as e:
        logger.error("data error in `%s`: %s", args.command, e)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
