"""Gain-based feature importance over tree ensembles.

Every internal node recorded a split gain when the ensemble was trained;
summing those gains per feature and normalizing gives each feature's
share of the total objective reduction. Besides the ranking ensemble
itself, auxiliary ensembles can be trained on the same feature matrix
under squared-error or logistic loss to compare regression-style and
classification-style attributions.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .dataset import RankingDataset
from .errors import DegenerateChild, IoFailure
from .features import feature_name
from .lambdamart import BoostParams, RankModel, TreeNode, fit_tree, to_arrays, tree_predict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitStats:
    """Gradient/hessian sums of a candidate split's children."""

    g_left: float
    h_left: float
    g_right: float
    h_right: float
    lambda_reg: float = 1.0
    gamma: float = 1.0


def split_gain(s: SplitStats) -> float:
    """Objective reduction of splitting one leaf into two.

    gain = 1/2 * [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda)
                  - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma
    """
    if s.h_left + s.lambda_reg <= 0 or s.h_right + s.lambda_reg <= 0:
        raise DegenerateChild(
            f"child hessian mass too small: H_L={s.h_left}, H_R={s.h_right}, "
            f"lambda={s.lambda_reg}"
        )
    g_parent = s.g_left + s.g_right
    h_parent = s.h_left + s.h_right
    return 0.5 * (
        s.g_left**2 / (s.h_left + s.lambda_reg)
        + s.g_right**2 / (s.h_right + s.lambda_reg)
        - g_parent**2 / (h_parent + s.lambda_reg)
    ) - s.gamma


@dataclass(frozen=True)
class ImportanceEntry:
    feature_id: int
    name: str
    total_gain: float
    share: float
    split_count: int


@dataclass(frozen=True)
class ImportanceReport:
    entries: tuple[ImportanceEntry, ...]  # descending by total gain

    def top(self, k: int) -> tuple[ImportanceEntry, ...]:
        return self.entries[:k]

    def share_of(self, feature_id: int) -> float:
        for e in self.entries:
            if e.feature_id == feature_id:
                return e.share
        return 0.0


def _walk(node: TreeNode, totals: dict[int, float], counts: dict[int, int]) -> None:
    if node.is_leaf:
        return
    totals[node.feature_id] = totals.get(node.feature_id, 0.0) + node.gain
    counts[node.feature_id] = counts.get(node.feature_id, 0) + 1
    _walk(node.left, totals, counts)
    _walk(node.right, totals, counts)


def gain_importance(model: RankModel) -> ImportanceReport:
    """Total recorded split gain per feature, sorted descending.

    A stump-only model has no splits and yields an empty report. Ties in
    total gain break toward the lower feature id.
    """
    totals: dict[int, float] = {}
    counts: dict[int, int] = {}
    for tree in model.trees:
        _walk(tree, totals, counts)
    grand_total = sum(totals.values())
    entries = [
        ImportanceEntry(
            feature_id=fid,
            name=feature_name(fid),
            total_gain=gain,
            share=gain / grand_total if grand_total > 0 else 0.0,
            split_count=counts[fid],
        )
        for fid, gain in totals.items()
    ]
    entries.sort(key=lambda e: (-e.total_gain, e.feature_id))
    return ImportanceReport(entries=tuple(entries))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    en = np.exp(x[~pos])
    out[~pos] = en / (1.0 + en)
    return out


def pointwise_gradients(
    pred: np.ndarray, labels: np.ndarray, mode: str
) -> tuple[np.ndarray, np.ndarray]:
    """First/second loss derivatives for the auxiliary ensembles.

    'regression' is squared error: g = pred - label, h = 1.
    'classification' is logistic loss: g = p - label, h = p(1-p)
    with p = sigmoid(pred).
    """
    pred = np.asarray(pred, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if mode == "regression":
        return pred - labels, np.ones_like(pred)
    if mode == "classification":
        p = _sigmoid(pred)
        return p - labels, p * (1.0 - p)
    raise ValueError(f"unknown mode {mode!r}")


def auxiliary_importance(
    ds: RankingDataset, mode: str, params: BoostParams
) -> ImportanceReport:
    """Importance from an ensemble boosted under a pointwise loss.

    The ensemble reuses the same tree builder and regularization as the
    ranking trainer; only the gradients change (see pointwise_gradients).
    """
    if mode not in ("regression", "classification"):
        raise ValueError(f"unknown mode {mode!r}")
    X, y, _ = to_arrays(ds)
    pred = np.zeros(X.shape[0], dtype=np.float64)
    trees = []
    for _ in range(params.num_rounds):
        grad, hess = pointwise_gradients(pred, y, mode)
        tree = fit_tree(X, grad, hess, params)
        trees.append(tree)
        pred += params.eta * tree_predict(tree, X)
    model = RankModel(trees=trees, eta=params.eta, feature_count=X.shape[1])
    return gain_importance(model)


def write_importance_tsv(report: ImportanceReport, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("feature_id\tname\ttotal_gain\tshare\tsplit_count\n")
            for e in report.entries:
                fh.write(
                    f"{e.feature_id}\t{e.name}\t{e.total_gain}\t{e.share}\t{e.split_count}\n"
                )
    except OSError as e:
        raise IoFailure(f"cannot write importance report {path}: {e}") from e


def write_importance_plot_json(report: ImportanceReport, path: str, top: int = 10) -> None:
    """Plot-ready JSON: top-k names and gain shares, largest first."""
    entries = report.top(top)
    payload = {
        "labels": [e.name for e in entries],
        "shares": [e.share for e in entries],
        "total_gains": [e.total_gain for e in entries],
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
    except OSError as e:
        raise IoFailure(f"cannot write importance plot data {path}: {e}") from e
