"""Parsing of corpus, judgment, and split files.

File formats (all UTF-8, tab-separated, one record per line):

* corpus:    ``<qid>\\t<question>\\t<answer1>\\t<answer2>``
* judgments: ``<qid1>\\t<qid2>\\t<label>`` with label 0 or 1
* splits:    one qid per line

Real web dumps are messy, so the parsers are deliberately forgiving in
documented ways: surplus tabs beyond the fourth corpus field fold into
answer2, and judgments whose qids are missing from the corpus (or that
link a question to itself) are dropped and counted rather than aborting
the run.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    BadLabel,
    DuplicateQid,
    IoFailure,
    MalformedLine,
    OverlappingSplit,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QARecord:
    """One corpus row: a question and its two top-rated answers."""

    qid: str
    question: str
    answer1: str
    answer2: str


@dataclass(frozen=True)
class LinkJudgment:
    """A labeled (query question, candidate question) pair."""

    qid1: str
    qid2: str
    label: int


@dataclass(frozen=True)
class QuerySplit:
    train: frozenset[str]
    dev: frozenset[str]
    test: frozenset[str]

    def split_of(self, qid: str) -> str | None:
        if qid in self.train:
            return "train"
        if qid in self.dev:
            return "dev"
        if qid in self.test:
            return "test"
        return None


@dataclass
class JudgmentReport:
    """What the judgment parser kept and why it dropped the rest."""

    kept: int = 0
    dropped_unresolvable: int = 0
    dropped_self_links: int = 0
    group_sizes: Counter = field(default_factory=Counter)

    def modal_group_size(self) -> int | None:
        if not self.group_sizes:
            return None
        return self.group_sizes.most_common(1)[0][0]


def parse_corpus(path: str) -> list[QARecord]:
    """One QARecord per non-empty line; duplicate qids are an error."""
    records: list[QARecord] = []
    seen: set[str] = set()
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) < 4:
                    raise MalformedLine(line_no, f"expected >= 4 fields, got {len(fields)}")
                qid, question, answer1 = fields[0], fields[1], fields[2]
                # stray tabs inside web-dump answer text fold into answer2
                answer2 = "\t".join(fields[3:])
                if not qid:
                    raise MalformedLine(line_no, "empty qid")
                if not question:
                    raise MalformedLine(line_no, f"empty question for qid {qid!r}")
                if qid in seen:
                    raise DuplicateQid(qid, line_no)
                seen.add(qid)
                records.append(QARecord(qid, question, answer1, answer2))
    except OSError as e:
        raise IoFailure(f"cannot read corpus {path}: {e}") from e
    return records


def write_corpus(records: Iterable[QARecord], path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(f"{r.qid}\t{r.question}\t{r.answer1}\t{r.answer2}\n")
    except OSError as e:
        raise IoFailure(f"cannot write corpus {path}: {e}") from e


def corpus_index(records: Iterable[QARecord]) -> dict[str, QARecord]:
    return {r.qid: r for r in records}


def parse_judgments(
    path: str, corpus: Sequence[QARecord] | Mapping[str, QARecord]
) -> tuple[list[LinkJudgment], JudgmentReport]:
    """Parse labeled pairs and join them against the corpus.

    Pairs referencing unknown qids, or linking a question to itself, are
    dropped with counts in the returned report. Bad labels abort.
    """
    known = set(corpus) if isinstance(corpus, Mapping) else {r.qid for r in corpus}
    judgments: list[LinkJudgment] = []
    report = JudgmentReport()
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 3:
                    raise MalformedLine(line_no, f"expected 3 fields, got {len(fields)}")
                qid1, qid2, label_str = fields
                if label_str not in ("0", "1"):
                    raise BadLabel(label_str, line_no)
                if qid1 == qid2:
                    report.dropped_self_links += 1
                    continue
                if qid1 not in known or qid2 not in known:
                    report.dropped_unresolvable += 1
                    continue
                judgments.append(LinkJudgment(qid1, qid2, int(label_str)))
    except OSError as e:
        raise IoFailure(f"cannot read judgments {path}: {e}") from e
    report.kept = len(judgments)
    per_query = Counter(j.qid1 for j in judgments)
    report.group_sizes = Counter(per_query.values())
    dropped = report.dropped_unresolvable + report.dropped_self_links
    if dropped:
        logger.warning(
            "%s: dropped %d judgments (%d unresolvable, %d self links)",
            path,
            dropped,
            report.dropped_unresolvable,
            report.dropped_self_links,
        )
    logger.info(
        "%s: %d judgments over %d queries, modal group size %s",
        path,
        report.kept,
        len(per_query),
        report.modal_group_size(),
    )
    return judgments, report


def _read_qid_lines(path: str) -> frozenset[str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return frozenset(line.strip() for line in fh if line.strip())
    except OSError as e:
        raise IoFailure(f"cannot read split file {path}: {e}") from e


def load_splits(train_path: str, dev_path: str, test_path: str) -> QuerySplit:
    """Load the three query-id lists and validate pairwise disjointness."""
    train = _read_qid_lines(train_path)
    dev = _read_qid_lines(dev_path)
    test = _read_qid_lines(test_path)
    for (name_a, a), (name_b, b) in (
        (("train", train), ("dev", dev)),
        (("train", train), ("test", test)),
        (("dev", dev), ("test", test)),
    ):
        overlap = a & b
        if overlap:
            raise OverlappingSplit(sorted(overlap)[0], (name_a, name_b))
    logger.info("splits: train=%d dev=%d test=%d", len(train), len(dev), len(test))
    return QuerySplit(train=train, dev=dev, test=test)


def split_coverage(judgments: Iterable[LinkJudgment], split: QuerySplit) -> dict:
    """Report how judgment queries map onto the splits; never repairs anything."""
    queries = {j.qid1 for j in judgments}
    uncovered = sorted(q for q in queries if split.split_of(q) is None)
    total_split = len(split.train) + len(split.dev) + len(split.test)
    report = {
        "judgment_queries": len(queries),
        "split_total": total_split,
        "uncovered_queries": len(uncovered),
        "uncovered_sample": uncovered[:10],
    }
    if uncovered or total_split != len(queries):
        logger.warning(
            "split files cover %d qids but judgments contain %d queries (%d uncovered)",
            total_split,
            len(queries),
            len(uncovered),
        )
    return report
