import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_unit_vectors
from dtmetrics.affinity import (
    AffinityCurve,
    CurvePoint,
    Direction,
    SentenceEmbeddings,
    document_affinity,
    read_curve_csv,
    score_ra,
    sentence_bertscore,
    split_sentences,
    write_curve_csv,
)
from dtmetrics.ingest import DocumentPair
from dtmetrics.scorers import StubScorer


def embed(vectors) -> SentenceEmbeddings:
    return SentenceEmbeddings(sentence="", vectors=np.asarray(vectors, dtype=np.float64))


# --------------------------------------------------------------------------
# sentence splitting
# --------------------------------------------------------------------------

def test_split_sentences_examples():
    assert split_sentences("a. b? c!") == ["a.", "b?", "c!"]
    assert split_sentences("") == []


def test_split_sentences_abbreviation_guard():
    text = "we use e.g. n-grams for scoring. it works well."
    assert split_sentences(text) == ["we use e.g. n-grams for scoring.", "it works well."]


def test_split_sentences_fixture_golden():
    text = "we present tool. it uses embeddings (cf. prior work). does it help? yes!"
    assert split_sentences(text) == [
        "we present tool.",
        "it uses embeddings (cf. prior work).",
        "does it help?",
        "yes!",
    ]


def test_split_sentences_are_substrings():
    text = "alpha beta. gamma delta! epsilon"
    for sentence in split_sentences(text):
        assert sentence in text


# --------------------------------------------------------------------------
# sentence pair score
# --------------------------------------------------------------------------

def test_identical_sentences_score_exactly_one():
    s = embed(np.eye(4)[:3])
    assert sentence_bertscore(s, s) == 1.0


def test_orthogonal_sentences_score_zero():
    s1 = embed([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
    s2 = embed([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    assert sentence_bertscore(s1, s2) == 0.0


def test_dim_mismatch_errors():
    with pytest.raises(ValueError, match="dim"):
        sentence_bertscore(embed(np.eye(3)), embed(np.eye(4)))


def test_three_by_two_tokens_matches_brute_force():
    rng = np.random.default_rng(11)
    v1 = random_unit_vectors(rng, 3, 5)
    v2 = random_unit_vectors(rng, 2, 5)
    got = sentence_bertscore(embed(v1), embed(v2))
    expected = oracles.sentence_score(v1.tolist(), v2.tolist())
    assert abs(got - expected) < 1e-9


# --------------------------------------------------------------------------
# document affinity
# --------------------------------------------------------------------------

def random_document(rng, n_sentences, max_tokens=6, dim=5):
    return [
        embed(random_unit_vectors(rng, rng.integers(1, max_tokens + 1), dim))
        for _ in range(n_sentences)
    ]


def test_self_affinity_is_one():
    rng = np.random.default_rng(3)
    doc = random_document(rng, 4)
    value, curve = document_affinity(doc, doc)
    assert abs(value - 1.0) <= 1e-6
    assert [p.argmax_partner for p in curve.points] == [0, 1, 2, 3]


def test_single_sentence_documents_reduce_to_sentence_score():
    rng = np.random.default_rng(4)
    s1 = embed(random_unit_vectors(rng, 3, 5))
    s2 = embed(random_unit_vectors(rng, 4, 5))
    value, curve = document_affinity([s1], [s2])
    assert value == sentence_bertscore(s1, s2)
    assert len(curve.points) == 1


def test_four_by_two_document_matches_brute_force():
    rng = np.random.default_rng(5)
    d1 = random_document(rng, 4)
    d2 = random_document(rng, 2)
    value, _ = document_affinity(d1, d2)
    expected = oracles.document_score(
        [s.vectors.tolist() for s in d1], [s.vectors.tolist() for s in d2]
    )
    assert abs(value - expected) < 1e-9


def test_empty_document_errors():
    rng = np.random.default_rng(6)
    doc = random_document(rng, 2)
    with pytest.raises(ValueError, match="empty"):
        document_affinity([], doc)
    with pytest.raises(ValueError, match="empty"):
        document_affinity(doc, [])


def test_argmax_prefers_lowest_index_on_ties():
    s = embed([[1.0, 0.0]])
    value, curve = document_affinity([s], [s, s])
    assert value == 1.0
    assert curve.points[0].argmax_partner == 0


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_affinity_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    d1 = random_document(rng, int(rng.integers(1, 5)))
    d2 = random_document(rng, int(rng.integers(1, 5)))
    value, _ = document_affinity(d1, d2)
    perm1 = list(rng.permutation(len(d1)))
    perm2 = list(rng.permutation(len(d2)))
    shuffled, _ = document_affinity([d1[i] for i in perm1], [d2[j] for j in perm2])
    assert shuffled == value


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_scores_bounded_by_unit_norm(seed):
    rng = np.random.default_rng(seed)
    s1 = embed(random_unit_vectors(rng, int(rng.integers(1, 6)), 4))
    s2 = embed(random_unit_vectors(rng, int(rng.integers(1, 6)), 4))
    score = sentence_bertscore(s1, s2)
    assert -1.0 - 1e-12 <= score <= 1.0 + 1e-12
    value, _ = document_affinity([s1, s2], [s2])
    assert -1.0 - 1e-12 <= value <= 1.0 + 1e-12


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_affinity_superset_monotonicity(seed):
    rng = np.random.default_rng(seed)
    d1 = random_document(rng, int(rng.integers(1, 5)))
    d2 = random_document(rng, int(rng.integers(1, 5)))
    extra = random_document(rng, 1)
    base, _ = document_affinity(d1, d2)
    grown, _ = document_affinity(d1, d2 + extra)
    assert grown >= base - 1e-12


# --------------------------------------------------------------------------
# score_ra
# --------------------------------------------------------------------------

@pytest.fixture
def stub_embedder():
    return StubScorer("stub-embedder", dim=8)


def test_identical_abstract_and_body_score_one(stub_embedder):
    text = "the system reads news. it answers questions."
    pair = DocumentPair(id="p", abstract_text=text, body_text=text)
    for direction in Direction:
        score = score_ra(pair, stub_embedder, direction)
        assert abs(score.value - 1.0) <= 1e-9


def test_score_ra_direction_swaps_roles(stub_embedder):
    pair = DocumentPair(
        id="p",
        abstract_text="one sentence only.",
        body_text="first body sentence. second body sentence. third one.",
    )
    doc_score = score_ra(pair, stub_embedder, Direction.DOC_OVER_ABSTRACT)
    abs_score = score_ra(pair, stub_embedder, Direction.ABSTRACT_OVER_DOC)
    assert len(doc_score.curve.points) == 3
    assert len(abs_score.curve.points) == 1
    assert doc_score.direction is Direction.DOC_OVER_ABSTRACT


def test_one_sentence_abstract_every_argmax_zero(stub_embedder):
    pair = DocumentPair(
        id="p",
        abstract_text="only sentence.",
        body_text="alpha beta. gamma delta. epsilon zeta.",
    )
    score = score_ra(pair, stub_embedder, Direction.DOC_OVER_ABSTRACT)
    assert all(p.argmax_partner == 0 for p in score.curve.points)


def test_score_ra_stub_golden_value(stub_embedder):
    """Frozen regression value; the stub makes it machine-independent."""
    pair = DocumentPair(
        id="p",
        abstract_text="systems summarize news. users ask questions.",
        body_text="the tool summarizes news stories. people ask the tool questions. it replies fast.",
    )
    score = score_ra(pair, stub_embedder, Direction.DOC_OVER_ABSTRACT)
    brute = oracles.document_score(
        [stub_embedder.get_embeddings(s).vectors.tolist()
         for s in split_sentences(pair.body_text)],
        [stub_embedder.get_embeddings(s).vectors.tolist()
         for s in split_sentences(pair.abstract_text)],
    )
    assert abs(score.value - brute) < 1e-9


# --------------------------------------------------------------------------
# curve io
# --------------------------------------------------------------------------

def test_curve_csv_roundtrip(tmp_path):
    curve = AffinityCurve(
        doc_id="d",
        points=(
            CurvePoint(0, 0.5, 1),
            CurvePoint(1, 0.25, 0),
        ),
        area=0.375,
    )
    path = tmp_path / "d.curve.csv"
    write_curve_csv(curve, path)
    loaded = read_curve_csv(path)
    assert loaded == curve
    header = path.read_text().splitlines()[0]
    assert header == "doc_id,sentence_index,best_score,argmax_abstract_sentence"
