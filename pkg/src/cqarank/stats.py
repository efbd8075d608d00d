"""Per-stream corpus statistics: document frequencies, IDF, average length.

A stream is one document collection: all question texts, or all
concatenated-answer texts. Lexical features always score a document
against the statistics of its own stream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .errors import EmptyCorpus, IoFailure
from .textprep import TokenizedText

_FORMAT = "cqarank-stats-v1"


class Stream(str, Enum):
    QUESTION = "question"
    ANSWER = "answer"


@dataclass(frozen=True)
class CorpusStats:
    """Frozen statistics for one stream; safe for concurrent readers."""

    stream: Stream
    n_docs: int
    df: Mapping[str, int] = field(repr=False)
    avdl: float

    def document_frequency(self, term: str) -> int:
        """n(t), clamped to n_docs for terms never seen in the stream."""
        return self.df.get(term, self.n_docs)


def build_stats(docs: Iterable[TokenizedText], stream: Stream) -> CorpusStats:
    """Count, per term, how many documents contain it; average the lengths."""
    docs = list(docs)
    if not docs:
        raise EmptyCorpus(f"no documents in {stream.value} stream")
    df: dict[str, int] = {}
    total_len = 0
    for doc in docs:
        total_len += doc.length
        for term in set(doc.tokens):
            df[term] = df.get(term, 0) + 1
    return CorpusStats(
        stream=stream,
        n_docs=len(docs),
        df=df,
        avdl=total_len / len(docs),
    )


def idf(stats: CorpusStats, term: str) -> float:
    """ln(N / n(t)). Unseen terms get n(t) = N, hence IDF 0."""
    return math.log(stats.n_docs / stats.document_frequency(term))


def save_stats(stats: CorpusStats, path: str) -> None:
    payload = {
        "format": _FORMAT,
        "stream": stats.stream.value,
        "n_docs": stats.n_docs,
        "avdl": stats.avdl,
        "df": dict(stats.df),
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
    except OSError as e:
        raise IoFailure(f"cannot write stats to {path}: {e}") from e


def load_stats(path: str) -> CorpusStats:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as e:
        raise IoFailure(f"cannot read stats from {path}: {e}") from e
    if payload.get("format") != _FORMAT:
        raise IoFailure(f"{path}: unknown stats format {payload.get('format')!r}")
    return CorpusStats(
        stream=Stream(payload["stream"]),
        n_docs=payload["n_docs"],
        df=payload["df"],
        avdl=payload["avdl"],
    )
