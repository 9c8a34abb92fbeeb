"""Independent brute-force oracles for the metric equations.

These deliberately share no code with the package: plain loops, plain
dicts, plain math. Tests compare package outputs against them.
"""

import math


def trigram_counts(tokens):
    counts = {}
    for i in range(len(tokens) - 2):
        tri = (tokens[i], tokens[i + 1], tokens[i + 2])
        counts[tri] = counts.get(tri, 0) + 1
    return counts


def smoothed_probability(counts, total, vocab, alpha, tri):
    return (counts.get(tri, 0) + alpha) / (total + alpha * (vocab + 1))


def recovery_ratio(corpus_token_lists, alpha, ref_tokens, gen_tokens):
    """Set-sum recovery ratio built from scratch over explicit trigram sets."""
    counts = {}
    for tokens in corpus_token_lists:
        for tri, c in trigram_counts(tokens).items():
            counts[tri] = counts.get(tri, 0) + c
    total = sum(counts.values())
    vocab = len(counts)
    ref_set = set(trigram_counts(ref_tokens))
    gen_set = set(trigram_counts(gen_tokens))
    numerator = 0.0
    denominator = 0.0
    for tri in sorted(ref_set):
        info = -math.log(smoothed_probability(counts, total, vocab, alpha, tri))
        denominator += info
        if tri in gen_set:
            numerator += info
    if denominator == 0.0:
        return 1.0 if ref_set <= gen_set else 0.0
    return numerator / denominator


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def sentence_score(s1, s2):
    """Nested-loop greedy token match: s1, s2 are lists of vectors (lists)."""
    total = 0.0
    for u in s1:
        total += max(dot(u, v) for v in s2)
    return total / len(s1)


def document_score(d1, d2):
    """Nested-loop document affinity: d1, d2 are lists of sentences."""
    total = 0.0
    for s1 in d1:
        total += max(sentence_score(s1, s2) for s2 in d2)
    return total / len(d1)
