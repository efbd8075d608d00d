"""Ranking datasets and their LibSVM serialization.

A dataset is an ordered list of query groups; order is deterministic
(numeric-aware sort on qid1, then qid2 within a group) so identical
inputs always serialize to identical bytes.

The LibSVM ranking line is ``<label> qid:<qid> 1:<v1> ... m:<vm>`` with
every index present (zeros written explicitly) so external consumers
agree on dimensionality. Values use shortest round-trip decimals, which
makes write -> read -> write bit-exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import IoFailure, MalformedLibsvmLine, UnsplitQuery
from .features import FEATURE_TABLE, FeatureVector, fmt_float
from .ingest import QuerySplit

logger = logging.getLogger(__name__)


def qid_sort_key(qid: str):
    """Numeric qids sort numerically, everything else lexicographically after."""
    if qid.isdigit():
        return (0, int(qid), qid)
    return (1, 0, qid)


@dataclass(frozen=True)
class RankingDataset:
    groups: tuple[tuple[str, tuple[FeatureVector, ...]], ...]
    split: str = ""

    @property
    def n_rows(self) -> int:
        return sum(len(vs) for _, vs in self.groups)

    @property
    def n_features(self) -> int:
        for _, vs in self.groups:
            if vs:
                return int(vs[0].values.size)
        return 0

    def rows(self) -> Iterable[FeatureVector]:
        for _, vs in self.groups:
            yield from vs


def group_vectors(vectors: Iterable[FeatureVector], split: str = "") -> RankingDataset:
    """Group by qid1 in deterministic order."""
    by_query: dict[str, list[FeatureVector]] = {}
    for v in vectors:
        by_query.setdefault(v.qid1, []).append(v)
    groups = []
    for qid1 in sorted(by_query, key=qid_sort_key):
        members = sorted(by_query[qid1], key=lambda v: qid_sort_key(v.qid2))
        groups.append((qid1, tuple(members)))
    return RankingDataset(groups=tuple(groups), split=split)


def build_dataset(
    vectors: Iterable[FeatureVector], split: QuerySplit, which: str
) -> RankingDataset:
    """Keep only the vectors whose qid1 belongs to the chosen split."""
    if which not in ("train", "dev", "test"):
        raise ValueError(f"unknown split {which!r}")
    chosen = []
    for v in vectors:
        where = split.split_of(v.qid1)
        if where is None:
            raise UnsplitQuery(v.qid1)
        if where == which:
            chosen.append(v)
    return group_vectors(chosen, split=which)


def mask_features(
    ds: RankingDataset, feature_ids: Sequence[int]
) -> tuple[RankingDataset, list[tuple[int, int]]]:
    """Project onto a subset of original feature ids (renumbered 1..m).

    Returns the masked dataset and the (new index, original id) mapping.
    """
    ids = sorted(set(feature_ids))
    idx = [fid - 1 for fid in ids]
    mapping = [(new + 1, fid) for new, fid in enumerate(ids)]
    groups = []
    for qid1, vs in ds.groups:
        groups.append(
            (
                qid1,
                tuple(
                    FeatureVector(v.qid1, v.qid2, v.label, v.values[idx]) for v in vs
                ),
            )
        )
    return RankingDataset(groups=tuple(groups), split=ds.split), mapping


def write_feature_map(mapping: Sequence[tuple[int, int]], path: str) -> None:
    """Companion TSV for masked exports: new index, original id, name, stream."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for new_index, fid in mapping:
                _, name, stream = FEATURE_TABLE[fid - 1]
                fh.write(f"{new_index}\t{fid}\t{name}\t{stream}\n")
    except OSError as e:
        raise IoFailure(f"cannot write feature map {path}: {e}") from e


def _qid_tokens(ds: RankingDataset) -> tuple[dict[str, str], bool]:
    """Original qids when numeric; otherwise a stable integer remapping."""
    qids = [qid1 for qid1, _ in ds.groups]
    if all(q.isdigit() for q in qids):
        return {q: q for q in qids}, False
    remap = {q: str(i + 1) for i, q in enumerate(sorted(qids, key=qid_sort_key))}
    return remap, True


def write_libsvm(ds: RankingDataset, path: str) -> None:
    """One line per vector, grouped contiguously by query."""
    remap, remapped = _qid_tokens(ds)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for qid1, vs in ds.groups:
                tag = remap[qid1]
                for v in vs:
                    feats = " ".join(
                        f"{i + 1}:{fmt_float(x)}" for i, x in enumerate(v.values)
                    )
                    fh.write(f"{v.label} qid:{tag} {feats}\n")
    except OSError as e:
        raise IoFailure(f"cannot write libsvm file {path}: {e}") from e
    if remapped:
        qidmap_path = path + ".qidmap"
        try:
            with open(qidmap_path, "w", encoding="utf-8") as fh:
                for original, numeric in sorted(remap.items(), key=lambda kv: int(kv[1])):
                    fh.write(f"{numeric}\t{original}\n")
        except OSError as e:
            raise IoFailure(f"cannot write qid map {qidmap_path}: {e}") from e
        logger.info("non-numeric qids remapped; table written to %s", qidmap_path)


def read_libsvm(path: str) -> RankingDataset:
    """Inverse of write_libsvm. Non-contiguous groups are accepted and
    regrouped with a warning; malformed lines abort with their line number."""
    rows: list[FeatureVector] = []
    width: int | None = None
    last_qid: str | None = None
    seen_qids: set[str] = set()
    regrouped = False
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) < 2 or not parts[1].startswith("qid:"):
                    raise MalformedLibsvmLine(line_no, "missing qid tag")
                try:
                    label = int(float(parts[0]))
                except ValueError:
                    raise MalformedLibsvmLine(line_no, f"bad label {parts[0]!r}") from None
                qid = parts[1][4:]
                if not qid:
                    raise MalformedLibsvmLine(line_no, "empty qid")
                values = []
                for expected, tok in enumerate(parts[2:], 1):
                    idx_str, _, val_str = tok.partition(":")
                    try:
                        idx = int(idx_str)
                        val = float(val_str)
                    except ValueError:
                        raise MalformedLibsvmLine(line_no, f"bad feature {tok!r}") from None
                    if idx != expected:
                        raise MalformedLibsvmLine(
                            line_no, f"feature index {idx} out of order (expected {expected})"
                        )
                    values.append(val)
                if width is None:
                    width = len(values)
                elif len(values) != width:
                    raise MalformedLibsvmLine(
                        line_no, f"row has {len(values)} features, file started with {width}"
                    )
                if qid != last_qid:
                    if qid in seen_qids:
                        regrouped = True
                    seen_qids.add(qid)
                    last_qid = qid
                rows.append(
                    FeatureVector(
                        qid1=qid,
                        qid2=str(len(rows)),
                        label=label,
                        values=np.asarray(values, dtype=np.float64),
                    )
                )
    except OSError as e:
        raise IoFailure(f"cannot read libsvm file {path}: {e}") from e
    if regrouped:
        logger.warning("%s: qid groups are not contiguous; regrouping", path)
    # preserve within-group file order: qid2 was synthesized as the row number
    by_query: dict[str, list[FeatureVector]] = {}
    order: list[str] = []
    for r in rows:
        if r.qid1 not in by_query:
            order.append(r.qid1)
        by_query.setdefault(r.qid1, []).append(r)
    groups = tuple(
        (qid, tuple(by_query[qid])) for qid in sorted(order, key=qid_sort_key)
    )
    return RankingDataset(groups=groups)
