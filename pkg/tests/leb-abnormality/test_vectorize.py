import math

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
import pytest

from leb.abnormality.vectorize import (
    FeatureKind,
    SparseVector,
    TfidfStats,
    Vocabulary,
    VocabularyError,
    count_vectorize,
    fit_tfidf,
    fit_vocabulary,
    inverse_document_frequency,
    term_frequency,
    tfidf_vectorize,
    vectorize_documents,
)


@pytest.fixture
def five_docs() -> list[tuple[str, ...]]:
    return [
        ("a", "b", "a", "c"),
        ("b", "c"),
        ("a", "d"),
        ("b", "b", "b", "e"),
        ("c", "d", "e", "a", "b"),
    ]


@pytest.fixture
def five_docs_tfidf() -> np.ndarray:
    """TF-IDF of `five_docs`, computed by hand.

    Document frequencies: a 3, b 4, c 3, d 2, e 2 out of 5 documents.
    idf: a, c: ln(5/3) = 0.5108256237659907; b: ln(5/4) = 0.22314355131420976;
    d, e: ln(5/2) = 0.9162907318741551.

    """
    return np.array(
        [
            [0.25541281188299536, 0.05578588782855244, 0.12770640594149768, 0.0, 0.0],
            [0.0, 0.11157177565710488, 0.25541281188299536, 0.0, 0.0],
            [0.25541281188299536, 0.0, 0.0, 0.45814536593707755, 0.0],
            [0.0, 0.16735766348565732, 0.0, 0.0, 0.22907268296853878],
            [
                0.10216512475319814,
                0.04462871026284195,
                0.10216512475319814,
                0.18325814637483102,
                0.18325814637483102,
            ],
        ]
    )


def test_fit_vocabulary():
    vocab = fit_vocabulary([("a", "b", "a"), ("b", "c")])

    assert vocab.terms == ("a", "b", "c")
    assert_array_equal(vocab.doc_freq, [1, 2, 1])
    assert vocab.index == {"a": 0, "b": 1, "c": 2}
    assert vocab.n_docs == 2


def test_fit_vocabulary_single_doc():
    vocab = fit_vocabulary([("x",)])

    assert vocab.terms == ("x",)
    assert_array_equal(vocab.doc_freq, [1])


def test_fit_vocabulary_sorts_by_code_point():
    vocab = fit_vocabulary([("খাই", "আমি", "ভাত", "b", "A")])

    assert vocab.terms == tuple(sorted(vocab.terms))
    assert vocab.terms[0] == "A"


def test_fit_vocabulary_all_empty():
    with pytest.raises(VocabularyError):
        fit_vocabulary([(), ()])


def test_fit_vocabulary_max_features():
    docs = [("a", "b", "c"), ("b", "c"), ("c", "d"), ("d",)]

    vocab = fit_vocabulary(docs, max_features=2)

    # c is in 3 documents; b and d tie with 2 and b comes first
    assert vocab.terms == ("b", "c")
    assert_array_equal(vocab.doc_freq, [2, 3])


def test_vocabulary_rejects_unsorted_terms():
    with pytest.raises(ValueError):
        Vocabulary(terms=("b", "a"), doc_freq=np.array([1, 1]), n_docs=1)


def test_count_vectorize():
    vocab = Vocabulary(terms=("আমি", "খাই", "ভাত"), doc_freq=np.array([1, 1, 1]), n_docs=1)
    # Columns follow code point order: আমি 0, খাই 1, ভাত 2
    vector = count_vectorize(("আমি", "ভাত", "ভাত"), vocab)

    assert vector.entries == {0: 1.0, 2: 2.0}
    assert vector.dimension == 3


def test_count_vectorize_empty_and_oov():
    vocab = Vocabulary(terms=("a", "b", "c"), doc_freq=np.array([1, 1, 1]), n_docs=1)

    empty = count_vectorize((), vocab)
    oov = count_vectorize(("x", "y"), vocab)

    assert empty.nnz == 0 and empty.dimension == 3
    assert oov.nnz == 0 and oov.dimension == 3


@pytest.mark.parametrize(
    "term, doc, expected",
    [
        ("a", ("a", "b", "a", "c"), 0.5),
        ("z", ("a", "b", "a", "c"), 0.0),
        ("a", ("a", "a", "a"), 1.0),
    ],
)
def test_term_frequency(term, doc, expected):
    assert term_frequency(term, doc) == expected


def test_term_frequency_empty_doc():
    with pytest.raises(ValueError):
        term_frequency("a", ())


def test_inverse_document_frequency():
    vocab = Vocabulary(terms=("a", "b"), doc_freq=np.array([1, 4]), n_docs=4)

    assert inverse_document_frequency("a", vocab) == pytest.approx(1.386294, abs=1e-6)
    assert inverse_document_frequency("b", vocab) == 0.0
    with pytest.raises(VocabularyError):
        inverse_document_frequency("c", vocab)


def test_inverse_document_frequency_single_doc():
    vocab = fit_vocabulary([("a",)])

    assert inverse_document_frequency("a", vocab, n_docs=1) == 0.0


def test_tfidf_vectorize():
    vocab = fit_vocabulary([("a", "b"), ("b",), ("b",), ("b",)])
    stats = fit_tfidf(vocab)

    vector = tfidf_vectorize(("a", "b"), vocab, stats)

    # b is in every document, so its weight is 0 and it is not stored
    assert vector.entries == pytest.approx({0: 0.5 * math.log(4)})
    assert vector.entries[0] == pytest.approx(0.693147, abs=1e-6)


def test_tfidf_universal_terms_give_zero_vector():
    docs = [("a", "b"), ("b", "a"), ("a", "b", "b")]
    vocab = fit_vocabulary(docs)
    stats = fit_tfidf(vocab)

    assert tfidf_vectorize(docs[0], vocab, stats).nnz == 0


def test_tfidf_empty_doc_is_zero_vector():
    vocab = fit_vocabulary([("a",), ("b",)])

    vector = tfidf_vectorize((), vocab, fit_tfidf(vocab))

    assert vector.nnz == 0
    assert vector.dimension == 2


def test_tfidf_oov_tokens_count_towards_length():
    vocab = fit_vocabulary([("a",), ("b",)])
    stats = fit_tfidf(vocab)

    vector = tfidf_vectorize(("a", "x", "y", "z"), vocab, stats)

    assert vector.entries == pytest.approx({0: 0.25 * math.log(2)})


def test_tfidf_literal_tf():
    vocab = fit_vocabulary([("a",), ("b",)])
    stats = fit_tfidf(vocab, literal_tf=True)

    vector = tfidf_vectorize(("a", "a", "b", "x"), vocab, stats)

    assert vector.entries == pytest.approx({0: math.log(2), 1: math.log(2)})


def test_tfidf_matrix_matches_hand_computation(five_docs, five_docs_tfidf):
    vocab = fit_vocabulary(five_docs)
    stats = fit_tfidf(vocab)

    matrix = vectorize_documents(five_docs, [0, 1, 0, 1, 0], vocab, FeatureKind.TFIDF, stats)

    assert vocab.terms == ("a", "b", "c", "d", "e")
    assert_array_equal(vocab.doc_freq, [3, 4, 3, 2, 2])
    assert_allclose(matrix.csr.toarray(), five_docs_tfidf, rtol=0, atol=1e-9)


def test_count_and_tfidf_share_dimension(five_docs):
    vocab = fit_vocabulary(five_docs)
    labels = [0, 1, 0, 1, 0]

    counts = vectorize_documents(five_docs, labels, vocab, FeatureKind.COUNT)
    tfidf = vectorize_documents(five_docs, labels, vocab, FeatureKind.TFIDF, fit_tfidf(vocab))

    assert counts.shape == tfidf.shape == (5, 5)
    assert_array_equal(counts.csr.toarray()[3], [0, 3, 0, 0, 1])


def test_tfidf_requires_stats(five_docs):
    vocab = fit_vocabulary(five_docs)

    with pytest.raises(ValueError):
        vectorize_documents(five_docs, [0] * 5, vocab, FeatureKind.TFIDF)


def test_tfidf_stats_reject_negative_weights():
    with pytest.raises(ValueError):
        TfidfStats(idf=np.array([0.5, -0.1]))


def test_sparse_vector_invariants():
    with pytest.raises(ValueError):
        SparseVector(np.array([1, 0]), np.array([1.0, 2.0]), 3)
    with pytest.raises(ValueError):
        SparseVector(np.array([3]), np.array([1.0]), 3)
    with pytest.raises(ValueError):
        SparseVector(np.array([0]), np.array([0.0]), 3)
    with pytest.raises(ValueError, match="finite"):
        SparseVector(np.array([0, 2]), np.array([1.0, np.nan]), 3)
    with pytest.raises(ValueError, match="finite"):
        SparseVector(np.array([1]), np.array([-np.inf]), 3)


def test_sparse_vector_dense_conversions():
    dense = np.array([0.0, 1.5, 0.0, -2.0])

    vector = SparseVector.from_dense(dense)

    assert vector.entries == {1: 1.5, 3: -2.0}
    assert_array_equal(vector.to_dense(), dense)
    assert_array_equal(vector.to_csr().toarray(), dense[np.newaxis, :])
    assert vector.dot(SparseVector.from_dense([1.0, 2.0, 3.0, 4.0])) == -5.0
    with pytest.raises(ValueError):
        vector.dot(SparseVector.zeros(3))


def test_from_entries_drops_zeros():
    vector = SparseVector.from_entries({2: 1.0, 0: 0.0, 1: 3.0}, 4)

    assert_array_equal(vector.indices, [1, 2])
    assert_array_equal(vector.values, [3.0, 1.0])
