"""LambdaMART: gradient-boosted regression trees driven by lambda gradients.

Each boosting round turns the current ranking of every query group into
pairwise pseudo-gradients: for documents i, j with label_i > label_j,

    rho      = 1 / (1 + exp(sigma * (s_i - s_j)))
    delta    = |NDCG@k change if i and j swapped ranks|
    lambda_i += sigma * rho * delta          (positive pushes the score up)
    lambda_j -= sigma * rho * delta
    hess     += sigma^2 * rho * (1 - rho) * delta   (both documents)

A depth-bounded regression tree is then fit to the negated lambdas with
Newton leaf values -G / (H + lambda_reg), choosing splits by the
second-order gain

    1/2 * [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma

and rejecting splits whose gain is <= 0 or whose children carry less
hessian mass than min_child_weight. After every round the model is
evaluated on the dev set and the round with the best dev NDCG@10 is the
one retained.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import RankingDataset, qid_sort_key
from .errors import DimensionMismatch, EmptyCorpus, IoFailure
from .metrics import ndcg_at_k

logger = logging.getLogger(__name__)


@dataclass
class BoostParams:
    eta: float = 0.3
    gamma: float = 1.0
    lambda_reg: float = 1.0
    min_child_weight: float = 0.1
    max_depth: int = 3
    num_rounds: int = 500
    sigma: float = 1.0
    ndcg_truncation: int = 10

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must be in (0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.num_rounds < 1:
            raise ValueError("num_rounds must be >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.ndcg_truncation < 1:
            raise ValueError("ndcg_truncation must be >= 1")


@dataclass
class TreeNode:
    """Either an internal split (feature_id is set) or a leaf (value is set).

    feature_id is the 1-based feature id; rows with
    x[feature_id - 1] < threshold go left.
    """

    value: float = 0.0
    feature_id: int | None = None
    threshold: float = 0.0
    gain: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature_id is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": self.value}
        return {
            "feature_id": self.feature_id,
            "threshold": self.threshold,
            "gain": self.gain,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "feature_id" not in d:
            return cls(value=d["value"])
        return cls(
            feature_id=d["feature_id"],
            threshold=d["threshold"],
            gain=d.get("gain", 0.0),
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


def tree_predict(root: TreeNode, X: np.ndarray) -> np.ndarray:
    """Leaf value reached by every row (iterative, mask-partitioned)."""
    out = np.empty(X.shape[0], dtype=np.float64)
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.value
        else:
            mask = X[idx, node.feature_id - 1] < node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
    return out


@dataclass
class RankModel:
    """score(x) = eta * sum over trees of the leaf value reached by x."""

    trees: list[TreeNode]
    eta: float
    feature_count: int

    def score_rows(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.feature_count:
            raise DimensionMismatch(self.feature_count, X.shape[-1], "scoring matrix")
        total = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            total += tree_predict(tree, X)
        return self.eta * total

    def to_dict(self) -> dict:
        return {
            "format": "cqarank-model-v1",
            "eta": self.eta,
            "feature_count": self.feature_count,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RankModel":
        if d.get("format") != "cqarank-model-v1":
            raise IoFailure(f"unknown model format {d.get('format')!r}")
        return cls(
            trees=[TreeNode.from_dict(t) for t in d["trees"]],
            eta=d["eta"],
            feature_count=d["feature_count"],
        )


def save_model(model: RankModel, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(model.to_dict(), fh)
    except OSError as e:
        raise IoFailure(f"cannot write model to {path}: {e}") from e


def load_model(path: str) -> RankModel:
    try:
        with open(path, encoding="utf-8") as fh:
            return RankModel.from_dict(json.load(fh))
    except OSError as e:
        raise IoFailure(f"cannot read model from {path}: {e}") from e


def _neg_sigmoid(x: np.ndarray) -> np.ndarray:
    """1 / (1 + exp(x)), overflow-safe for large |x|."""
    out = np.empty_like(x)
    pos = x >= 0
    ep = np.exp(-x[pos])
    out[pos] = ep / (1.0 + ep)
    out[~pos] = 1.0 / (1.0 + np.exp(x[~pos]))
    return out


def _rank_discounts(scores: np.ndarray, k: int) -> np.ndarray:
    """1/log2(rank+1) for each document's current rank; 0 beyond rank k.

    Ranking is by descending score with stable tie order, so ties keep
    the group's deterministic (qid2) order.
    """
    order = np.argsort(-scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.int64)
    ranks[order] = np.arange(1, scores.size + 1)
    discounts = np.zeros(scores.size, dtype=np.float64)
    within = ranks <= k
    discounts[within] = 1.0 / np.log2(ranks[within] + 1.0)
    return discounts


def pair_gradients(
    scores: np.ndarray, labels: np.ndarray, k: int = 10, sigma: float = 1.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-pair lambda and hessian contributions for one group.

    Returns (relevant row indices, non-relevant row indices, lambda
    contribution matrix, hessian contribution matrix); entry [a, b]
    belongs to the pair (relevant a, non-relevant b). Document-level
    gradients are the row sums (positive for relevant documents) and
    negated column sums; exposing the decomposition keeps the
    antisymmetric construction checkable at full precision.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    rel = np.flatnonzero(labels > 0)
    non = np.flatnonzero(labels <= 0)
    if rel.size == 0 or non.size == 0:
        empty = np.zeros((rel.size, non.size), dtype=np.float64)
        return rel, non, empty, empty
    discounts = _rank_discounts(scores, k)
    ideal_top = min(k, rel.size)
    idcg = sum(1.0 / math.log2(r + 1.0) for r in range(1, ideal_top + 1))
    delta = np.abs(discounts[rel][:, None] - discounts[non][None, :]) / idcg
    rho = _neg_sigmoid(sigma * (scores[rel][:, None] - scores[non][None, :]))
    lam = sigma * rho * delta
    hess = sigma * sigma * rho * (1.0 - rho) * delta
    return rel, non, lam, hess


def lambda_gradients(
    scores: np.ndarray, labels: np.ndarray, k: int = 10, sigma: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Per-document (lambda, hessian) for one group; zeros when the group
    has no (relevant, non-relevant) pair."""
    rel, non, lam_pairs, hess_pairs = pair_gradients(scores, labels, k, sigma)
    n = len(scores)
    lam = np.zeros(n, dtype=np.float64)
    hess = np.zeros(n, dtype=np.float64)
    if lam_pairs.size:
        lam[rel] = lam_pairs.sum(axis=1)
        lam[non] = -lam_pairs.sum(axis=0)
        hess[rel] = hess_pairs.sum(axis=1)
        hess[non] = hess_pairs.sum(axis=0)
    return lam, hess


def fit_tree(
    X: np.ndarray, grad: np.ndarray, hess: np.ndarray, params: BoostParams
) -> TreeNode:
    """Exact greedy regression tree on (grad, hess).

    grad follows the loss-derivative convention (leaf value is
    -sum(grad) / (sum(hess) + lambda_reg)), so callers fitting to lambda
    gradients pass their negation. Thresholds are midpoints between
    consecutive distinct feature values. Degenerate data yields a single
    leaf.
    """
    X = np.asarray(X, dtype=np.float64)
    lam_reg = params.lambda_reg
    mcw = params.min_child_weight

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        g_total = grad[idx].sum()
        h_total = hess[idx].sum()
        leaf = TreeNode(value=-g_total / (h_total + lam_reg))
        if depth >= params.max_depth or idx.size < 2:
            return leaf
        parent_score = g_total * g_total / (h_total + lam_reg)
        best_gain = 0.0
        best = None  # (feature, threshold)
        for f in range(X.shape[1]):
            xs = X[idx, f]
            order = np.argsort(xs, kind="stable")
            xs_sorted = xs[order]
            boundaries = xs_sorted[1:] != xs_sorted[:-1]
            if not boundaries.any():
                continue
            gl = np.cumsum(grad[idx][order])[:-1]
            hl = np.cumsum(hess[idx][order])[:-1]
            gr = g_total - gl
            hr = h_total - hl
            gains = (
                0.5 * (gl * gl / (hl + lam_reg) + gr * gr / (hr + lam_reg) - parent_score)
                - params.gamma
            )
            valid = boundaries & (hl >= mcw) & (hr >= mcw) & (gains > 0.0)
            if not valid.any():
                continue
            gains = np.where(valid, gains, -np.inf)
            p = int(np.argmax(gains))
            if gains[p] > best_gain:
                best_gain = float(gains[p])
                best = (f, (xs_sorted[p] + xs_sorted[p + 1]) / 2.0)
        if best is None:
            return leaf
        feature, threshold = best
        mask = X[idx, feature] < threshold
        if not mask.any() or mask.all():  # midpoint collapsed onto a value
            return leaf
        return TreeNode(
            feature_id=feature + 1,
            threshold=float(threshold),
            gain=best_gain,
            left=build(idx[mask], depth + 1),
            right=build(idx[~mask], depth + 1),
        )

    return build(np.arange(X.shape[0]), 0)


def to_arrays(ds: RankingDataset) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    """Flatten a grouped dataset into (X, labels, group slices)."""
    n = ds.n_rows
    if n == 0:
        raise EmptyCorpus("dataset has no rows")
    width = ds.n_features
    X = np.empty((n, width), dtype=np.float64)
    y = np.empty(n, dtype=np.int64)
    slices = []
    at = 0
    for _, vs in ds.groups:
        start = at
        for v in vs:
            if v.values.size != width:
                raise DimensionMismatch(width, v.values.size, f"pair ({v.qid1}, {v.qid2})")
            X[at] = v.values
            y[at] = v.label
            at += 1
        slices.append((start, at))
    return X, y, slices


@dataclass
class RoundLog:
    round: int
    train_ndcg10: float
    dev_ndcg10: float


@dataclass
class TrainResult:
    model: RankModel
    history: list[RoundLog] = field(default_factory=list)
    best_round: int = 0

    @property
    def best_dev_ndcg10(self) -> float:
        return self.history[self.best_round].dev_ndcg10


def _mean_group_ndcg(scores: np.ndarray, y: np.ndarray, slices, k: int) -> float:
    total = 0.0
    evaluated = 0
    for start, end in slices:
        labels = y[start:end]
        if not (labels > 0).any():
            continue
        order = np.argsort(-scores[start:end], kind="stable")
        total += ndcg_at_k(list(labels[order]), k)
        evaluated += 1
    return total / evaluated if evaluated else 0.0


def train(
    train_ds: RankingDataset,
    dev_ds: RankingDataset,
    params: BoostParams,
    log_path: str | None = None,
) -> TrainResult:
    """Boost for num_rounds and retain the round with the best dev NDCG@10."""
    X, y, slices = to_arrays(train_ds)
    Xd, yd, slices_d = to_arrays(dev_ds)
    if Xd.shape[1] != X.shape[1]:
        raise DimensionMismatch(X.shape[1], Xd.shape[1], "dev dataset")

    n = X.shape[0]
    scores = np.zeros(n, dtype=np.float64)
    dev_scores = np.zeros(Xd.shape[0], dtype=np.float64)
    trees: list[TreeNode] = []
    history: list[RoundLog] = []
    best_round = 0
    best_dev = -1.0
    k = params.ndcg_truncation

    for r in range(params.num_rounds):
        lam = np.zeros(n, dtype=np.float64)
        hess = np.zeros(n, dtype=np.float64)
        for start, end in slices:
            l, h = lambda_gradients(scores[start:end], y[start:end], k, params.sigma)
            lam[start:end] = l
            hess[start:end] = h
        tree = fit_tree(X, -lam, hess, params)
        trees.append(tree)
        scores += params.eta * tree_predict(tree, X)
        dev_scores += params.eta * tree_predict(tree, Xd)
        entry = RoundLog(
            round=r + 1,
            train_ndcg10=_mean_group_ndcg(scores, y, slices, 10),
            dev_ndcg10=_mean_group_ndcg(dev_scores, yd, slices_d, 10),
        )
        history.append(entry)
        if entry.dev_ndcg10 > best_dev:
            best_dev = entry.dev_ndcg10
            best_round = r
        if (r + 1) % 50 == 0 or r == 0:
            logger.info(
                "round %d: train ndcg@10=%.4f dev ndcg@10=%.4f",
                entry.round,
                entry.train_ndcg10,
                entry.dev_ndcg10,
            )

    if log_path:
        try:
            with open(log_path, "w", encoding="utf-8") as fh:
                fh.write("round\ttrain_ndcg@10\tdev_ndcg@10\n")
                for entry in history:
                    fh.write(f"{entry.round}\t{entry.train_ndcg10}\t{entry.dev_ndcg10}\n")
        except OSError as e:
            raise IoFailure(f"cannot write training log {log_path}: {e}") from e

    model = RankModel(
        trees=trees[: best_round + 1], eta=params.eta, feature_count=X.shape[1]
    )
    logger.info(
        "retained model from round %d (dev ndcg@10=%.4f)", best_round + 1, best_dev
    )
    return TrainResult(model=model, history=history, best_round=best_round)


def score(
    model: RankModel, ds: RankingDataset
) -> list[tuple[str, list[tuple[str, float, int]]]]:
    """Rank every group by descending model score, ties kept in qid2 order.

    Returns [(qid1, [(qid2, score, label), ...]), ...].
    """
    ranked = []
    for qid1, vs in ds.groups:
        X = np.stack([v.values for v in vs])
        s = model.score_rows(X)
        # groups are stored qid2-sorted, so a stable sort keeps qid2 tie order
        order = np.argsort(-s, kind="stable")
        ranked.append(
            (qid1, [(vs[i].qid2, float(s[i]), vs[i].label) for i in order])
        )
    ranked.sort(key=lambda g: qid_sort_key(g[0]))
    return ranked


def ranked_labels(
    scored: list[tuple[str, list[tuple[str, float, int]]]]
) -> list[tuple[str, list[int]]]:
    """Collapse score() output to (qid, ranked label list) for the metrics."""
    return [(qid1, [label for _, _, label in items]) for qid1, items in scored]
