import numpy as np
import pytest

from cqarank.ingest import LinkJudgment, QARecord

# results of acceptance-suite tests, printed one line per criterion at the end
_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _ACCEPTANCE_RESULTS[name] = {
            "passed": "PASS",
            "failed": "FAIL",
            "skipped": "SKIP",
        }.get(report.outcome, report.outcome.upper())
    elif report.when == "setup" and report.outcome == "skipped":
        _ACCEPTANCE_RESULTS[name] = "SKIP"
    elif report.when == "setup" and report.outcome == "failed":
        _ACCEPTANCE_RESULTS[name] = "ERROR"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{status:<5} {name}")


TOY_RECORDS = [
    QARecord(
        "1",
        "how to sort a list of tuples in python",
        "use sorted with a key function",
        "the list sort method sorts in place",
    ),
    QARecord(
        "2",
        "sorting tuples by the second element",
        "pass a lambda as key to sorted",
        "",
    ),
    QARecord(
        "3",
        "read lines from a text file",
        "open the file and iterate over it",
        "use with open so the file is closed",
    ),
    QARecord(
        "4",
        "regex to match all digits in a string",
        "use findall with a digit class",
        "compile the pattern once and reuse it",
    ),
    QARecord(
        "5",
        "convert a string to an integer",
        "call int on the string",
        "catch the error for bad input",
    ),
]

TOY_JUDGMENTS = [
    LinkJudgment("1", "2", 1),
    LinkJudgment("1", "3", 0),
    LinkJudgment("1", "4", 0),
    LinkJudgment("1", "5", 0),
    LinkJudgment("3", "1", 0),
    LinkJudgment("3", "2", 0),
    LinkJudgment("3", "4", 0),
    LinkJudgment("3", "5", 1),
]


@pytest.fixture
def toy_records():
    return list(TOY_RECORDS)


@pytest.fixture
def toy_judgments():
    return list(TOY_JUDGMENTS)


@pytest.fixture
def toy_corpus_files(tmp_path):
    """Toy corpus/judgments/splits written in the on-disk formats."""
    corpus = tmp_path / "corpus.tsv"
    corpus.write_text(
        "".join(
            f"{r.qid}\t{r.question}\t{r.answer1}\t{r.answer2}\n" for r in TOY_RECORDS
        ),
        encoding="utf-8",
    )
    judgments = tmp_path / "judgments.tsv"
    judgments.write_text(
        "".join(f"{j.qid1}\t{j.qid2}\t{j.label}\n" for j in TOY_JUDGMENTS),
        encoding="utf-8",
    )
    (tmp_path / "train.txt").write_text("1\n", encoding="utf-8")
    (tmp_path / "dev.txt").write_text("3\n", encoding="utf-8")
    (tmp_path / "test.txt").write_text("", encoding="utf-8")
    return {
        "corpus": str(corpus),
        "judgments": str(judgments),
        "train": str(tmp_path / "train.txt"),
        "dev": str(tmp_path / "dev.txt"),
        "test": str(tmp_path / "test.txt"),
        "dir": tmp_path,
    }


def make_synthetic_groups(
    rng: np.random.Generator,
    n_groups: int,
    group_size: int,
    relevant_per_group: tuple[int, int] = (1, 3),
    informative=None,
    qid_offset: int = 0,
):
    """Random 35-feature vectors grouped by query.

    informative: optional callable (label, rng) -> dict of feature_id -> value
    overriding chosen features so that relevance is (partially) recoverable.
    """
    from cqarank.features import NUM_FEATURES, FeatureVector

    vectors = []
    for g in range(n_groups):
        qid1 = str(qid_offset + g + 1)
        lo, hi = relevant_per_group
        n_rel = int(rng.integers(lo, hi + 1))
        labels = np.zeros(group_size, dtype=int)
        labels[rng.choice(group_size, size=n_rel, replace=False)] = 1
        for d in range(group_size):
            values = rng.random(NUM_FEATURES)
            if informative is not None:
                for fid, val in informative(int(labels[d]), rng).items():
                    values[fid - 1] = val
            vectors.append(
                FeatureVector(
                    qid1=qid1,
                    qid2=f"{qid1}_{d}",
                    label=int(labels[d]),
                    values=values,
                )
            )
    return vectors
