"""Independent brute-force oracles used by the test suite.

Everything here is written straight from the defining formulas with
plain Python loops and dense data structures, deliberately sharing no
code with the package paths it checks (tokenization is the one shared
convention, since features are defined over the package's token
stream).
"""

import itertools
import math

from cqarank.textprep import concat_answers, tokenize


# ---------------------------------------------------------------------------
# corpus statistics and lexical features
# ---------------------------------------------------------------------------


def oracle_df(token_lists):
    """term -> number of documents containing it, by scanning every doc."""
    df = {}
    for tokens in token_lists:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    return df


def oracle_idf(term, df, n_docs):
    n = df.get(term, n_docs)
    return math.log(n_docs / n)


def oracle_aggregates(values):
    """(sum, min, max, mean, population variance); zeros for empty input."""
    if not values:
        return (0.0, 0.0, 0.0, 0.0, 0.0)
    total = 0.0
    for v in values:
        total += v
    mean = total / len(values)
    var = 0.0
    for v in values:
        var += (v - mean) ** 2
    var /= len(values)
    return (total, min(values), max(values), mean, var)


def oracle_bm25(query_tokens, doc_tokens, df, n_docs, avdl, k1, b):
    score = 0.0
    for term in dict.fromkeys(query_tokens):
        tf = sum(1 for t in doc_tokens if t == term)
        if tf == 0:
            continue
        idf = oracle_idf(term, df, n_docs)
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len(doc_tokens) / avdl))
    return score


def oracle_dense_tfidf_cosine(tokens_a, tokens_b, df, n_docs):
    """Dense normalized-TF * IDF vectors over the explicit union vocabulary."""
    vocab = sorted(set(tokens_a) | set(tokens_b))

    def vec(tokens):
        out = []
        for term in vocab:
            if not tokens:
                out.append(0.0)
                continue
            tf = sum(1 for t in tokens if t == term) / len(tokens)
            out.append(tf * oracle_idf(term, df, n_docs))
        return out

    va, vb = vec(tokens_a), vec(tokens_b)
    dot = sum(x * y for x, y in zip(va, vb))
    na = math.sqrt(sum(x * x for x in va))
    nb = math.sqrt(sum(x * x for x in vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def oracle_cosine(u, v):
    dot = sum(x * y for x, y in zip(u, v))
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def oracle_all_features(records, qid1, qid2, k1, b, provider):
    """All 35 features for the pair, recomputed from the definitions.

    records: list of QARecord forming the whole corpus (both streams are
    built from it, answers concatenated). Returns a list of 35 floats in
    feature-id order.
    """
    by_qid = {r.qid: r for r in records}
    q_docs = {r.qid: list(tokenize(r.question)) for r in records}
    a_docs = {
        r.qid: list(tokenize(concat_answers(r.answer1, r.answer2))) for r in records
    }
    n = len(records)
    q_df = oracle_df(q_docs.values())
    a_df = oracle_df(a_docs.values())
    q_avdl = sum(len(d) for d in q_docs.values()) / n
    a_avdl = sum(len(d) for d in a_docs.values()) / n

    query = q_docs[qid1]
    query_terms = list(dict.fromkeys(query))

    def stream_block(doc, df, avdl, with_raw_tf):
        tfs = [float(sum(1 for t in doc if t == term)) for term in query_terms]
        if len(doc) > 0:
            ntfs = [tf / len(doc) for tf in tfs]
        else:
            ntfs = [0.0 for _ in tfs]
        idfs = [oracle_idf(t, df, n) for t in dict.fromkeys(doc)]
        tfidfs = [
            ntf * oracle_idf(term, df, n) for term, ntf in zip(query_terms, ntfs)
        ]
        block = []
        if with_raw_tf:
            block.extend(oracle_aggregates(tfs))
        block.extend(oracle_aggregates(ntfs))
        block.extend(oracle_aggregates(idfs)[1:])  # min, max, avg, var
        block.extend(oracle_aggregates(tfidfs)[1:])
        block.append(oracle_bm25(query, doc, df, n, avdl, k1, b))
        return block

    out = stream_block(q_docs[qid2], q_df, q_avdl, with_raw_tf=True)
    out.append(oracle_dense_tfidf_cosine(query, q_docs[qid2], q_df, n))
    out.append(
        oracle_cosine(
            list(provider.embed(by_qid[qid1].question)),
            list(provider.embed(by_qid[qid2].question)),
        )
    )
    out.extend(stream_block(a_docs[qid2], a_df, a_avdl, with_raw_tf=False))
    return out


# ---------------------------------------------------------------------------
# ranking metrics
# ---------------------------------------------------------------------------


def oracle_dcg(labels, k):
    total = 0.0
    for rank, label in enumerate(labels[:k], 1):
        total += (2.0**label - 1.0) / math.log2(rank + 1)
    return total


def oracle_ndcg_exhaustive(labels, k):
    """NDCG with the normalizer found by brute force over all orderings.

    Only usable on small groups (the normalizer enumerates every
    permutation of the label list).
    """
    best = max(oracle_dcg(list(p), k) for p in itertools.permutations(labels))
    if best == 0.0:
        return 0.0
    return oracle_dcg(labels, k) / best


def oracle_ndcg(labels, k):
    """NDCG from the definition, ideal ordering taken as sorted labels."""
    ideal = oracle_dcg(sorted(labels, reverse=True), k)
    if ideal == 0.0:
        return 0.0
    return oracle_dcg(labels, k) / ideal


def oracle_ap(labels, k):
    total_relevant = sum(1 for l in labels if l > 0)
    if total_relevant == 0:
        return 0.0
    ap = 0.0
    for rank in range(1, min(k, len(labels)) + 1):
        if labels[rank - 1] > 0:
            hits_so_far = sum(1 for l in labels[:rank] if l > 0)
            ap += hits_so_far / rank
    return ap / min(total_relevant, k)


def oracle_random_ndcg_baseline(groups, k, rng, samples=200):
    """Monte-Carlo mean NDCG@k of uniformly random rankings."""
    total = 0.0
    count = 0
    for labels in groups:
        labels = list(labels)
        if not any(l > 0 for l in labels):
            continue
        acc = 0.0
        for _ in range(samples):
            rng.shuffle(labels)
            acc += oracle_ndcg(labels, k)
        total += acc / samples
        count += 1
    return total / count
