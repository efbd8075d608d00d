"""Ranking quality metrics: NDCG@k and MAP@k over binary-labeled groups.

Plain-Python accumulation on purpose: group sizes are ~30 and k <= 10,
and keeping the arithmetic simple makes the exhaustive oracles in the
test suite bit-for-bit comparable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import IoFailure


def dcg_at_k(labels: Sequence[int], k: int) -> float:
    """Sum of (2^label - 1) / log2(rank + 1) over the top k ranks."""
    assert k >= 1
    total = 0.0
    for rank, label in enumerate(labels[:k], 1):
        total += (2.0**label - 1.0) / math.log2(rank + 1)
    return total


def ndcg_at_k(labels: Sequence[int], k: int) -> float:
    """DCG@k normalized by the ideal ordering's DCG@k; 0 if nothing is relevant."""
    ideal = dcg_at_k(sorted(labels, reverse=True), k)
    if ideal == 0.0:
        return 0.0
    return dcg_at_k(labels, k) / ideal


def map_at_k(labels: Sequence[int], k: int) -> float:
    """AP@k = sum of precision at each relevant rank <= k, over min(R, k).

    R counts every relevant item in the group, so a perfect top-k list
    scores 1 even when R > k. Returns 0 when nothing is relevant.
    """
    assert k >= 1
    total_relevant = sum(1 for l in labels if l > 0)
    if total_relevant == 0:
        return 0.0
    hits = 0
    ap = 0.0
    for rank, label in enumerate(labels[:k], 1):
        if label > 0:
            hits += 1
            ap += hits / rank
    return ap / min(total_relevant, k)


@dataclass
class MetricReport:
    map5: float
    map10: float
    ndcg5: float
    ndcg10: float
    evaluated: int
    skipped_no_relevant: int
    per_query: list[dict] = field(default_factory=list)

    def to_dict(self, with_per_query: bool = False) -> dict:
        out = {
            "map@5": self.map5,
            "map@10": self.map10,
            "ndcg@5": self.ndcg5,
            "ndcg@10": self.ndcg10,
            "evaluated_queries": self.evaluated,
            "skipped_no_relevant": self.skipped_no_relevant,
        }
        if with_per_query:
            out["per_query"] = self.per_query
        return out


def evaluate_rankings(ranked_groups: Iterable[tuple[str, Sequence[int]]]) -> MetricReport:
    """Mean metrics over groups given as (qid, labels in ranked order).

    Groups with no relevant candidate are excluded from the means and
    counted separately.
    """
    per_query = []
    sums = {"map5": 0.0, "map10": 0.0, "ndcg5": 0.0, "ndcg10": 0.0}
    evaluated = 0
    skipped = 0
    for qid, labels in ranked_groups:
        if not any(l > 0 for l in labels):
            skipped += 1
            per_query.append({"qid": qid, "skipped": True})
            continue
        row = {
            "qid": qid,
            "map@5": map_at_k(labels, 5),
            "map@10": map_at_k(labels, 10),
            "ndcg@5": ndcg_at_k(labels, 5),
            "ndcg@10": ndcg_at_k(labels, 10),
        }
        per_query.append(row)
        sums["map5"] += row["map@5"]
        sums["map10"] += row["map@10"]
        sums["ndcg5"] += row["ndcg@5"]
        sums["ndcg10"] += row["ndcg@10"]
        evaluated += 1
    n = max(evaluated, 1)
    return MetricReport(
        map5=sums["map5"] / n,
        map10=sums["map10"] / n,
        ndcg5=sums["ndcg5"] / n,
        ndcg10=sums["ndcg10"] / n,
        evaluated=evaluated,
        skipped_no_relevant=skipped,
        per_query=per_query,
    )


def write_report_tsv(report: MetricReport, path: str, per_query: bool = False) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("metric\tvalue\n")
            for key, value in report.to_dict().items():
                fh.write(f"{key}\t{value}\n")
            if per_query:
                fh.write("\nqid\tmap@5\tmap@10\tndcg@5\tndcg@10\n")
                for row in report.per_query:
                    if row.get("skipped"):
                        fh.write(f"{row['qid']}\tskipped\t\t\t\n")
                    else:
                        fh.write(
                            f"{row['qid']}\t{row['map@5']}\t{row['map@10']}"
                            f"\t{row['ndcg@5']}\t{row['ndcg@10']}\n"
                        )
    except OSError as e:
        raise IoFailure(f"cannot write metric report {path}: {e}") from e


def write_report_json(report: MetricReport, path: str, per_query: bool = False) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(with_per_query=per_query), fh, indent=2)
    except OSError as e:
        raise IoFailure(f"cannot write metric report {path}: {e}") from e
