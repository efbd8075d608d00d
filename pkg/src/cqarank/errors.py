"""Exception types raised across the toolkit.

Every error carries enough context (line numbers, offending ids, values)
to be actionable from a batch run's log.
"""


class CqaRankError(Exception):
    """Base class for all toolkit errors."""


class IoFailure(CqaRankError):
    """A file could not be read or written."""


class MalformedLine(CqaRankError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no
        self.detail = detail


class DuplicateQid(CqaRankError):
    def __init__(self, qid: str, line_no: int):
        super().__init__(f"duplicate qid {qid!r} at line {line_no}")
        self.qid = qid
        self.line_no = line_no


class BadLabel(CqaRankError):
    def __init__(self, value: str, line_no: int):
        super().__init__(f"line {line_no}: label {value!r} is not 0 or 1")
        self.value = value
        self.line_no = line_no


class UnresolvableQid(CqaRankError):
    def __init__(self, qid: str):
        super().__init__(f"qid {qid!r} not present in the corpus")
        self.qid = qid


class OverlappingSplit(CqaRankError):
    def __init__(self, qid: str, splits: tuple[str, str]):
        super().__init__(f"qid {qid!r} appears in both {splits[0]} and {splits[1]}")
        self.qid = qid
        self.splits = splits


class UnsplitQuery(CqaRankError):
    def __init__(self, qid: str):
        super().__init__(f"query {qid!r} belongs to no split")
        self.qid = qid


class EmptyCorpus(CqaRankError):
    """Statistics or training requested over zero documents."""


class LengthMismatch(CqaRankError):
    def __init__(self, len_u: int, len_v: int):
        super().__init__(f"vector lengths differ: {len_u} vs {len_v}")
        self.len_u = len_u
        self.len_v = len_v


class DimensionMismatch(CqaRankError):
    def __init__(self, expected: int, got: int, where: str = ""):
        msg = f"expected dimension {expected}, got {got}"
        if where:
            msg = f"{where}: {msg}"
        super().__init__(msg)
        self.expected = expected
        self.got = got


class RemoteUnavailable(CqaRankError):
    """The remote embedding endpoint failed after all retries."""


class MalformedLibsvmLine(CqaRankError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no
        self.detail = detail


class DegenerateChild(CqaRankError):
    """A split-gain evaluation received a child with non-positive hessian mass."""


class ConfigError(CqaRankError):
    """Invalid experiment configuration."""
