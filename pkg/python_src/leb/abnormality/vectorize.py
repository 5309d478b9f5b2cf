"""Bag-of-words feature extraction: vocabularies, count vectors and TF-IDF vectors.

Term frequency is the number of occurrences of a term divided by the number of tokens in the
document, out-of-vocabulary tokens included. Inverse document frequency is the natural logarithm
of the number of training documents divided by the number of training documents that contain the
term. TF-IDF is their product, without smoothing, sublinear scaling or row normalization.

"""
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
import math
from typing import Mapping, Optional, Self, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.sparse import csr_matrix

from leb.abnormality.tokenizer import TokenSeq


class FeatureKind(Enum):
    COUNT = "count"
    TFIDF = "tfidf"


class VocabularyError(Exception):
    """Raised when a vocabulary cannot be built or does not contain a requested term."""


@dataclass(frozen=True, eq=False)
class SparseVector:
    """A real vector that stores only its nonzero entries.

    Attributes
    ----------
    indices : NDArray[np.int64]
        Strictly increasing column indexes of the nonzero entries.
    values : NDArray[np.float64]
        The nonzero values, parallel to `indices`.
    dimension : int
        The length of the vector.

    """

    indices: NDArray[np.int64]
    values: NDArray[np.float64]
    dimension: int

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "values", values)

        if indices.ndim != 1 or values.ndim != 1 or indices.shape != values.shape:
            raise ValueError(
                "Indices and values must be 1-dimensional arrays of the same length. Actual "
                f"shapes: indices: {indices.shape}, values: {values.shape}"
            )
        if self.dimension < 0:
            raise ValueError(f"The dimension must be non-negative. Actual: {self.dimension}")
        if len(indices) and (indices[0] < 0 or indices[-1] >= self.dimension):
            raise ValueError(f"Indices must lie in [0, {self.dimension}).")
        if np.any(np.diff(indices) <= 0):
            raise ValueError("Indices must be strictly increasing.")
        if not np.all(np.isfinite(values)):
            raise ValueError("Sparse vector values must be finite.")
        if np.any(values == 0):
            raise ValueError("A sparse vector only stores nonzero values.")

    def __len__(self):
        return self.dimension

    @classmethod
    def zeros(cls, dimension: int) -> Self:
        return cls(np.array([], dtype=np.int64), np.array([], dtype=np.float64), dimension)

    @classmethod
    def from_entries(cls, entries: Mapping[int, float], dimension: int) -> Self:
        """Builds a vector from a column -> value map, dropping explicit zeros."""
        items = sorted((int(i), float(v)) for i, v in entries.items() if v != 0)
        return cls(
            np.array([i for i, _ in items], dtype=np.int64),
            np.array([v for _, v in items], dtype=np.float64),
            dimension,
        )

    @classmethod
    def from_dense(cls, dense: Sequence[float]) -> Self:
        dense = np.asarray(dense, dtype=np.float64)
        indices = np.flatnonzero(dense)
        return cls(indices, dense[indices], len(dense))

    @property
    def entries(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.indices, self.values)}

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def to_dense(self) -> NDArray[np.float64]:
        dense = np.zeros(self.dimension, dtype=np.float64)
        dense[self.indices] = self.values
        return dense

    def to_csr(self) -> csr_matrix:
        """Returns the vector as a 1 x dimension CSR matrix."""
        return csr_matrix(
            (self.values, self.indices, np.array([0, self.nnz])), shape=(1, self.dimension)
        )

    def dot(self, other: "SparseVector") -> float:
        if other.dimension != self.dimension:
            raise ValueError(
                f"Dimension mismatch: {self.dimension} and {other.dimension}"
            )
        return float(self.to_dense() @ other.to_dense())


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Encoded documents and their labels.

    Attributes
    ----------
    rows : tuple[SparseVector, ...]
        One vector per document, all of the same dimension.
    labels : NDArray[np.int64]
        The binary label of each row.
    kind : FeatureKind
        How the rows were encoded.
    dimension : int
        The shared dimension of the rows, i.e. the vocabulary size.

    """

    rows: tuple[SparseVector, ...]
    labels: NDArray[np.int64]
    kind: FeatureKind
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))

        if self.labels.ndim != 1:
            raise ValueError(
                f"Labels must be 1-dimensional. Actual number of dimensions: {self.labels.ndim}"
            )
        if len(self.rows) != len(self.labels):
            raise ValueError(
                "The number of rows and labels must be the same. Actual numbers: rows: "
                f"{len(self.rows)}, labels: {len(self.labels)}"
            )
        for row in self.rows:
            if row.dimension != self.dimension:
                raise ValueError(
                    f"All rows must have dimension {self.dimension}. Found a row of dimension "
                    f"{row.dimension}"
                )

    def __len__(self):
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.dimension

    @cached_property
    def csr(self) -> csr_matrix:
        """The rows stacked into an n x dimension CSR matrix."""
        indptr = np.zeros(len(self.rows) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([row.nnz for row in self.rows])
        if self.rows:
            indices = np.concatenate([row.indices for row in self.rows])
            data = np.concatenate([row.values for row in self.rows])
        else:
            indices = np.array([], dtype=np.int64)
            data = np.array([], dtype=np.float64)

        return csr_matrix((data, indices, indptr), shape=self.shape)


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """The dictionary of training terms that defines the feature columns.

    Attributes
    ----------
    terms : tuple[str, ...]
        The terms in ascending code point order. Term `terms[i]` is column `i`.
    doc_freq : NDArray[np.int64]
        The number of training documents that contain each term.
    n_docs : int
        The number of training documents the vocabulary was fitted on.

    """

    terms: tuple[str, ...]
    doc_freq: NDArray[np.int64]
    n_docs: int
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "doc_freq", np.asarray(self.doc_freq, dtype=np.int64))

        if self.doc_freq.shape != (len(self.terms),):
            raise ValueError(
                f"Expected {len(self.terms)} document frequencies, got {self.doc_freq.shape}"
            )
        if any(a >= b for a, b in zip(self.terms, self.terms[1:])):
            raise ValueError("Vocabulary terms must be unique and sorted by code point.")
        if len(self.terms) and (
            np.min(self.doc_freq) < 1 or np.max(self.doc_freq) > self.n_docs
        ):
            raise ValueError(
                f"Document frequencies must lie in [1, {self.n_docs}]."
            )

        object.__setattr__(self, "index", {term: i for i, term in enumerate(self.terms)})

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index


def fit_vocabulary(
    train_docs: Sequence[TokenSeq], max_features: Optional[int] = None
) -> Vocabulary:
    """Builds the vocabulary of a set of training documents.

    Parameters
    ----------
    train_docs : Sequence[TokenSeq]
        The tokenized training documents.
    max_features : Optional[int]
        If given, keep only the `max_features` terms with the highest document frequency. Ties
        are broken by term order. The default keeps every term.

    Returns
    -------
    Vocabulary
        The fitted vocabulary.

    """
    if max_features is not None and max_features < 1:
        raise ValueError(f"max_features must be a positive integer. Actual: {max_features}")

    doc_freq = Counter()
    for doc in train_docs:
        doc_freq.update(set(doc))

    if not doc_freq:
        raise VocabularyError("Cannot fit a vocabulary: all training documents are empty.")

    terms = sorted(doc_freq)
    if max_features is not None and max_features < len(terms):
        # sorted() is stable, so equal frequencies keep code point order
        kept = sorted(terms, key=lambda t: -doc_freq[t])[:max_features]
        terms = sorted(kept)

    return Vocabulary(
        terms=tuple(terms),
        doc_freq=np.array([doc_freq[t] for t in terms], dtype=np.int64),
        n_docs=len(train_docs),
    )


def count_vectorize(doc: TokenSeq, vocab: Vocabulary) -> SparseVector:
    """Encodes a document as per-term occurrence counts. Unknown tokens are ignored."""
    counts = Counter(vocab.index[t] for t in doc if t in vocab.index)
    return SparseVector.from_entries(counts, len(vocab))


def term_frequency(term: str, doc: TokenSeq) -> float:
    """The number of occurrences of `term` in `doc` divided by the number of tokens in `doc`."""
    if len(doc) == 0:
        raise ValueError("The term frequency of an empty document is undefined.")
    return doc.count(term) / len(doc)


def inverse_document_frequency(
    term: str, vocab: Vocabulary, n_docs: Optional[int] = None
) -> float:
    """ln(n_docs / doc_freq[term]).

    Parameters
    ----------
    term : str
        A term of the vocabulary.
    vocab : Vocabulary
        The fitted vocabulary.
    n_docs : Optional[int]
        The number of training documents, by default the number the vocabulary was fitted on.

    Returns
    -------
    float
        The inverse document frequency, which is non-negative.

    """
    if term not in vocab.index:
        raise VocabularyError(f"Term {term!r} is not in the vocabulary.")
    if n_docs is None:
        n_docs = vocab.n_docs

    return math.log(n_docs / int(vocab.doc_freq[vocab.index[term]]))


@dataclass(frozen=True, eq=False)
class TfidfStats:
    """Inverse document frequencies computed on the training documents.

    Attributes
    ----------
    idf : NDArray[np.float64]
        One weight per vocabulary column.
    literal_tf : bool
        If True, the term frequency of a present term is taken as 1, i.e. the TF denominator is
        read as the number of occurrences of the term itself. TF-IDF then reduces to IDF.

    """

    idf: NDArray[np.float64]
    literal_tf: bool = False

    def __post_init__(self):
        object.__setattr__(self, "idf", np.asarray(self.idf, dtype=np.float64))
        if self.idf.ndim != 1:
            raise ValueError(f"Expected 1D idf weights, got {self.idf.ndim} dimensions.")
        if np.any(self.idf < 0) or not np.all(np.isfinite(self.idf)):
            raise ValueError("IDF weights must be finite and non-negative.")


def fit_tfidf(vocab: Vocabulary, literal_tf: bool = False) -> TfidfStats:
    """Computes the inverse document frequency of every vocabulary term."""
    idf = [inverse_document_frequency(term, vocab) for term in vocab.terms]
    return TfidfStats(idf=np.array(idf, dtype=np.float64), literal_tf=literal_tf)


def tfidf_vectorize(doc: TokenSeq, vocab: Vocabulary, stats: TfidfStats) -> SparseVector:
    """Encodes a document as TF-IDF weights.

    Unknown tokens are ignored but still count towards the document length. An empty document
    is encoded as the zero vector.

    """
    if len(stats.idf) != len(vocab):
        raise ValueError(
            f"TF-IDF stats have {len(stats.idf)} weights but the vocabulary has {len(vocab)} terms"
        )
    if len(doc) == 0:
        return SparseVector.zeros(len(vocab))

    counts = Counter(t for t in doc if t in vocab.index)
    entries = {}
    for term, count in counts.items():
        col = vocab.index[term]
        tf = 1.0 if stats.literal_tf else count / len(doc)
        entries[col] = tf * float(stats.idf[col])

    return SparseVector.from_entries(entries, len(vocab))


def vectorize(
    doc: TokenSeq,
    vocab: Vocabulary,
    kind: FeatureKind,
    stats: Optional[TfidfStats] = None,
) -> SparseVector:
    """Encodes a document with the given kind of features."""
    match kind:
        case FeatureKind.COUNT:
            return count_vectorize(doc, vocab)
        case FeatureKind.TFIDF:
            if stats is None:
                raise ValueError("TF-IDF encoding requires fitted TfidfStats.")
            return tfidf_vectorize(doc, vocab, stats)


def vectorize_documents(
    docs: Sequence[TokenSeq],
    labels: Sequence[int],
    vocab: Vocabulary,
    kind: FeatureKind,
    stats: Optional[TfidfStats] = None,
) -> FeatureMatrix:
    """Encodes a list of documents into a FeatureMatrix."""
    rows = tuple(vectorize(doc, vocab, kind, stats) for doc in docs)
    return FeatureMatrix(rows=rows, labels=np.asarray(labels), kind=kind, dimension=len(vocab))
