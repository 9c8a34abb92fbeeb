"""Corpus trigram distribution and the trigram information-recovery ratio.

The recovery ratio compares the self-information of the reference
document's distinct trigrams against the portion of it present in a
generated continuation: 1.0 means every reference trigram was recovered,
0.0 means none were.
"""

from __future__ import annotations

import math
import string
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

Trigram = tuple[str, str, str]

_PUNCT = frozenset(string.punctuation)


def tokenize(text: str) -> list[str]:
    """Split normalized text on spaces, with ASCII punctuation as its own tokens."""
    tokens: list[str] = []
    for chunk in text.split():
        run: list[str] = []
        for ch in chunk:
            if ch in _PUNCT:
                if run:
                    tokens.append("".join(run))
                    run = []
                tokens.append(ch)
            else:
                run.append(ch)
        if run:
            tokens.append("".join(run))
    return tokens


def iter_trigrams(tokens: Sequence[str]) -> Iterable[Trigram]:
    return zip(tokens, tokens[1:], tokens[2:])


@dataclass(frozen=True)
class TrigramTable:
    """Add-alpha smoothed trigram distribution over a training corpus.

    The event space is the observed trigrams plus a single out-of-vocabulary
    bucket, so smoothed probabilities sum to one.
    """

    counts: dict[Trigram, int]
    total: int
    vocab_trigrams: int
    smoothing_alpha: float

    def probability(self, trigram: Trigram) -> float:
        denom = self.total + self.smoothing_alpha * (self.vocab_trigrams + 1)
        if denom == 0:
            return 0.0
        return (self.counts.get(trigram, 0) + self.smoothing_alpha) / denom

    def self_information(self, trigram: Trigram) -> float:
        p = self.probability(trigram)
        if p <= 0.0:
            raise ValueError(
                f"zero-probability trigram {trigram}; build the table with alpha > 0"
            )
        return -math.log(p)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{self.smoothing_alpha!r} {self.total} {self.vocab_trigrams}\n")
            for tri in sorted(self.counts):
                fh.write(f"{tri[0]} {tri[1]} {tri[2]} {self.counts[tri]}\n")

    @classmethod
    def load(cls, path: str | Path) -> "TrigramTable":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 3:
                raise ValueError(f"{path}: malformed trigram table header")
            alpha, total, vocab = float(header[0]), int(header[1]), int(header[2])
            counts: dict[Trigram, int] = {}
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                if len(parts) != 4:
                    raise ValueError(f"{path}: malformed trigram line {line!r}")
                counts[(parts[0], parts[1], parts[2])] = int(parts[3])
        table = cls(counts=counts, total=total, vocab_trigrams=vocab, smoothing_alpha=alpha)
        if sum(counts.values()) != total or len(counts) != vocab:
            raise ValueError(f"{path}: inconsistent trigram table totals")
        return table


def build_trigram_table(corpus: Iterable[str], alpha: float = 1.0) -> TrigramTable:
    """Count all consecutive token triples over the corpus texts."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    counts: Counter[Trigram] = Counter()
    n_texts = 0
    for text in corpus:
        n_texts += 1
        counts.update(iter_trigrams(tokenize(text)))
    if n_texts == 0:
        raise ValueError("empty corpus")
    return TrigramTable(
        counts=dict(counts),
        total=sum(counts.values()),
        vocab_trigrams=len(counts),
        smoothing_alpha=alpha,
    )


def trigram_probability(table: TrigramTable, trigram: Trigram) -> float:
    return table.probability(trigram)


def recovery_ratio(table: TrigramTable, reference: Sequence[str], generated: Sequence[str]) -> float:
    """Fraction of the reference's trigram self-information present in the generation.

    Both trigram collections are treated as sets of distinct trigrams; the
    value is sum(-log p) over the intersection divided by sum(-log p) over
    the reference set.
    """
    ref_set = set(iter_trigrams(reference))
    if not ref_set:
        raise ValueError("no trigrams in reference")
    gen_set = set(iter_trigrams(generated))

    # identical sorted iteration for numerator and denominator keeps the
    # full-recovery case at exactly 1.0
    denominator = 0.0
    numerator = 0.0
    for tri in sorted(ref_set):
        info = table.self_information(tri)
        denominator += info
        if tri in gen_set:
            numerator += info
    if denominator == 0.0:
        return 1.0 if ref_set <= gen_set else 0.0
    return numerator / denominator


@dataclass(frozen=True)
class RecoveryScore:
    doc_id: str
    value: float
    generated_text: str
    model_id: str
    n_samples: int
    seed: int


def score_rr(pair, table: TrigramTable, generator, config) -> RecoveryScore:
    """Generate continuations of the abstract and score trigram recovery of the body.

    `generator` is any scorer exposing generate(prompt, config); the
    generated samples are concatenated into one recovery text that is kept
    for audit.
    """
    samples = generator.generate(pair.abstract_text, config)
    generated_text = " ".join(samples)
    value = recovery_ratio(table, tokenize(pair.body_text), tokenize(generated_text))
    return RecoveryScore(
        doc_id=pair.id,
        value=value,
        generated_text=generated_text,
        model_id=generator.model_id,
        n_samples=config.n_samples,
        seed=config.seed,
    )
