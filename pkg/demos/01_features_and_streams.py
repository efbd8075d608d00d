"""Walk through feature extraction on a tiny in-memory corpus.

Builds the two document streams (question texts, concatenated answers),
extracts the full 35-value vector for a judged pair, and prints each
value next to its name so the table layout is visible.
"""

from cqarank import (
    BM25Params,
    FEATURE_TABLE,
    FallbackEmbedder,
    LinkJudgment,
    QARecord,
    extract_pair,
)
from cqarank.ingest import corpus_index
from cqarank.pipeline import build_stream_stats

records = [
    QARecord("1", "how do i sort a list of tuples", "use sorted with a key", "sort is in place"),
    QARecord("2", "sorting tuples by second value", "pass a lambda to sorted", ""),
    QARecord("3", "read a file line by line", "open it and iterate", "with open closes it"),
    QARecord("4", "match digits with a regex", "use a digit class", "compile the pattern"),
]

# per-stream statistics: document frequencies, IDF, average length
stats_q, stats_a = build_stream_stats(records)
print(f"question stream: N={stats_q.n_docs}, avdl={stats_q.avdl:.2f}")
print(f"answer stream:   N={stats_a.n_docs}, avdl={stats_a.avdl:.2f}")
print()

# the offline embedder needs no model or network and is fully deterministic
provider = FallbackEmbedder()

judgment = LinkJudgment(qid1="1", qid2="2", label=1)
fv = extract_pair(
    judgment,
    corpus_index(records),
    stats_q,
    stats_a,
    BM25Params(),  # k1=1.2, b=0.75
    provider,
)

print(f"pair ({judgment.qid1}, {judgment.qid2}), label={judgment.label}:")
for (fid, name, stream), value in zip(FEATURE_TABLE, fv.values):
    print(f"  {fid:>2} {name:<14} [{stream:<8}] {value: .6f}")

# question-question features (1-21) come from the candidate's question
# text; question-answer features (22-35) from its concatenated answers.
# A candidate with empty answers zeroes out exactly the second block.
