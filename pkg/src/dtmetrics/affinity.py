"""Sentence-pair embedding similarity and document-level affinity.

A sentence pair score is the mean over the first sentence's tokens of the
best cosine match among the second sentence's tokens. Document affinity
lifts this to sentence sets: each sentence of the first document is matched
greedily against the best sentence of the second, and the mean of those
best scores is the affinity value. The per-sentence best scores form the
affinity curve used for plotting and audit.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)

_UNIT_NORM_TOL = 1e-6

# words after which a period does not end a sentence
_ABBREVIATIONS = frozenset(
    "e.g i.e etc al cf vs fig figs eq eqs sec secs no nos resp approx "
    "dr mr mrs ms prof st jr sr".split()
)

_TERMINATORS = ".!?"


def split_sentences(text: str) -> list[str]:
    """Split normalized plaintext into sentences on {. ! ?} followed by a space.

    A period after a known abbreviation does not split. Segments are exact
    substrings of the input (modulo surrounding spaces); empty segments are
    dropped.
    """
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS and i + 1 < n and text[i + 1] == " ":
            if ch == ".":
                word = text[start : i].rsplit(" ", 1)[-1].lstrip("(\"'[")
                if word.rstrip(".") in _ABBREVIATIONS or word in _ABBREVIATIONS:
                    i += 1
                    continue
            segment = text[start : i + 1].strip()
            if segment:
                sentences.append(segment)
            start = i + 2
            i += 2
            continue
        i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


@dataclass(frozen=True)
class SentenceEmbeddings:
    """Per-token unit-norm embedding vectors for one sentence."""

    sentence: str
    vectors: np.ndarray  # shape (n_tokens, dim)

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 1:
            raise ValueError("vectors must be a non-empty (n_tokens, dim) array")
        norms = np.linalg.norm(self.vectors, axis=1)
        if not np.all(np.abs(norms - 1.0) <= _UNIT_NORM_TOL):
            raise ValueError("embedding vectors must be unit-norm")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


@dataclass(frozen=True)
class CurvePoint:
    sentence_index: int
    best_score: float
    argmax_partner: int


@dataclass(frozen=True)
class AffinityCurve:
    """Per-sentence best-match scores; `area` is their mean."""

    doc_id: str
    points: tuple[CurvePoint, ...]
    area: float


class Direction(str, Enum):
    # iterate body sentences, matching each against the abstract (coverage)
    DOC_OVER_ABSTRACT = "doc"
    # iterate abstract sentences, matching each against the body
    ABSTRACT_OVER_DOC = "abstract"


def sentence_bertscore(s1: SentenceEmbeddings, s2: SentenceEmbeddings) -> float:
    """Mean over s1's tokens of the best dot-product match among s2's tokens."""
    if s1.dim != s2.dim:
        raise ValueError(f"embedding dim mismatch: {s1.dim} vs {s2.dim}")
    sims = s1.vectors @ s2.vectors.T
    return float(sims.max(axis=1).mean())


def document_affinity(
    e1: Sequence[SentenceEmbeddings], e2: Sequence[SentenceEmbeddings]
) -> tuple[float, AffinityCurve]:
    """Mean over e1's sentences of the best pair score against e2.

    The returned curve records, per e1 sentence, the best score and the
    index of the first e2 sentence achieving it.
    """
    if not e1 or not e2:
        raise ValueError("empty document")
    points = []
    for i, s1 in enumerate(e1):
        best = -np.inf
        best_j = 0
        for j, s2 in enumerate(e2):
            score = sentence_bertscore(s1, s2)
            if score > best:
                best = score
                best_j = j
        points.append(CurvePoint(sentence_index=i, best_score=best, argmax_partner=best_j))
    # fsum keeps the mean exactly invariant under sentence reordering
    area = math.fsum(p.best_score for p in points) / len(points)
    return area, AffinityCurve(doc_id="", points=tuple(points), area=area)


@dataclass(frozen=True)
class AffinityScore:
    doc_id: str
    value: float
    direction: Direction
    model_id: str
    curve: AffinityCurve


def score_ra(pair, embedder, direction: Direction = Direction.DOC_OVER_ABSTRACT) -> AffinityScore:
    """Compute document affinity for one pair via an embedding scorer.

    Under DOC_OVER_ABSTRACT (default) the body's sentences are scored
    against the abstract's; ABSTRACT_OVER_DOC swaps the roles.
    """
    abstract_sents = split_sentences(pair.abstract_text)
    body_sents = split_sentences(pair.body_text)
    if not abstract_sents or not body_sents:
        raise ValueError(f"{pair.id}: empty document")
    embedded_abstract = [embedder.get_embeddings(s) for s in abstract_sents]
    embedded_body = [embedder.get_embeddings(s) for s in body_sents]
    if direction is Direction.DOC_OVER_ABSTRACT:
        value, curve = document_affinity(embedded_body, embedded_abstract)
    else:
        value, curve = document_affinity(embedded_abstract, embedded_body)
    curve = replace(curve, doc_id=pair.id)
    return AffinityScore(
        doc_id=pair.id,
        value=value,
        direction=direction,
        model_id=embedder.model_id,
        curve=curve,
    )


# --------------------------------------------------------------------------
# curve export / plotting
# --------------------------------------------------------------------------

def write_curve_csv(curve: AffinityCurve, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["doc_id", "sentence_index", "best_score", "argmax_abstract_sentence"])
        for p in curve.points:
            writer.writerow([curve.doc_id, p.sentence_index, repr(p.best_score), p.argmax_partner])


def write_curve_summary(score: AffinityScore, path: str | Path) -> None:
    summary = {
        "doc_id": score.doc_id,
        "r_a": score.value,
        "direction": score.direction.value,
        "n_sentences": len(score.curve.points),
        "model_id": score.model_id,
    }
    Path(path).write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def read_curve_csv(path: str | Path) -> AffinityCurve:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty curve file")
    points = tuple(
        CurvePoint(
            sentence_index=int(r["sentence_index"]),
            best_score=float(r["best_score"]),
            argmax_partner=int(r["argmax_abstract_sentence"]),
        )
        for r in rows
    )
    area = math.fsum(p.best_score for p in points) / len(points)
    return AffinityCurve(doc_id=rows[0]["doc_id"], points=points, area=area)


def plot_curve_svg(curve: AffinityCurve, path: str | Path) -> None:
    """Render the per-sentence best-score curve as an SVG line chart."""
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    xs = [p.sentence_index for p in curve.points]
    ys = [p.best_score for p in curve.points]
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(xs, ys, marker="o", markersize=3, linewidth=1)
    ax.axhline(curve.area, linestyle="--", linewidth=0.8, color="gray")
    ax.set_xlabel("document sentence index")
    ax.set_ylabel("best match score")
    ax.set_title(f"{curve.doc_id} (area={curve.area:.4f})")
    ax.set_ylim(min(0.0, min(ys)) - 0.05, 1.05)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
