"""Fitted text classification pipelines: tokenizer, vectorizer and classifier in one object."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from leb.abnormality.corpus import Document, clean_text
from leb.abnormality.kernels import KernelSpec
from leb.abnormality.naive_bayes import NbModel, nb_decision, nb_fit, nb_predict
from leb.abnormality.svm import (
    SolverConfig,
    SvmModel,
    svm_decision,
    svm_decision_batch,
    svm_fit,
)
from leb.abnormality.tokenizer import TokenSeq, tokenize
from leb.abnormality.vectorize import (
    FeatureKind,
    FeatureMatrix,
    SparseVector,
    TfidfStats,
    Vocabulary,
    fit_tfidf,
    fit_vocabulary,
    vectorize,
    vectorize_documents,
)


class ClassifierKind(Enum):
    NB = "nb"
    SVM = "svm"


@dataclass(frozen=True)
class NbConfig:
    alpha: float = 1.0
    fit_prior: bool = True

    kind = ClassifierKind.NB

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive. Actual: {self.alpha}")


@dataclass(frozen=True)
class SvmConfig:
    c: float = 1.0
    kernel: KernelSpec = KernelSpec()
    solver: SolverConfig = field(default_factory=SolverConfig)

    kind = ClassifierKind.SVM

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"C must be positive. Actual: {self.c}")


ClassifierConfig = NbConfig | SvmConfig
Classifier = NbModel | SvmModel


@dataclass(frozen=True, eq=False)
class Pipeline:
    """A trained pipeline that maps raw sentences to labels.

    Attributes
    ----------
    feature_kind : FeatureKind
        Count or TF-IDF features.
    vocabulary : Vocabulary
        The vocabulary fitted on the training documents.
    tfidf_stats : Optional[TfidfStats]
        IDF weights; present if and only if `feature_kind` is TF-IDF.
    classifier : NbModel | SvmModel
        The trained classifier.

    """

    feature_kind: FeatureKind
    vocabulary: Vocabulary
    tfidf_stats: Optional[TfidfStats]
    classifier: Classifier

    def __post_init__(self):
        if (self.tfidf_stats is not None) != (self.feature_kind is FeatureKind.TFIDF):
            raise ValueError("TF-IDF stats must be present if and only if features are TF-IDF.")
        if self.tfidf_stats is not None and len(self.tfidf_stats.idf) != len(self.vocabulary):
            raise ValueError(
                f"{len(self.tfidf_stats.idf)} IDF weights for a vocabulary of "
                f"{len(self.vocabulary)} terms"
            )
        if self.n_features != len(self.vocabulary):
            raise ValueError(
                f"The classifier expects {self.n_features} features but the vocabulary has "
                f"{len(self.vocabulary)} terms"
            )

    @property
    def classifier_kind(self) -> ClassifierKind:
        return ClassifierKind.NB if isinstance(self.classifier, NbModel) else ClassifierKind.SVM

    @property
    def n_features(self) -> int:
        if isinstance(self.classifier, NbModel):
            return self.classifier.n_features
        return self.classifier.dimension

    def encode(self, text: str) -> SparseVector:
        """Cleans, tokenizes and vectorizes a raw sentence."""
        return self.encode_tokens(tokenize(clean_text(text)))

    def encode_tokens(self, tokens: TokenSeq) -> SparseVector:
        return vectorize(tokens, self.vocabulary, self.feature_kind, self.tfidf_stats)

    def transform(self, documents: Sequence[Document]) -> FeatureMatrix:
        return vectorize_documents(
            [tokenize(doc.text) for doc in documents],
            [doc.label for doc in documents],
            self.vocabulary,
            self.feature_kind,
            self.tfidf_stats,
        )

    def decision_vector(self, x: SparseVector) -> float:
        """SVM decision value, or NB log odds of abnormal against normal."""
        if isinstance(self.classifier, NbModel):
            return nb_decision(self.classifier, x)
        return svm_decision(self.classifier, x)

    def predict_vector(self, x: SparseVector) -> int:
        if isinstance(self.classifier, NbModel):
            return nb_predict(self.classifier, x)
        return int(svm_decision(self.classifier, x) > 0)

    def decision(self, text: str) -> float:
        return self.decision_vector(self.encode(text))

    def predict(self, text: str) -> int:
        return self.predict_vector(self.encode(text))

    def predict_matrix(self, matrix: FeatureMatrix) -> NDArray[np.int64]:
        """Labels for every row of an encoded matrix."""
        if isinstance(self.classifier, SvmModel):
            return (svm_decision_batch(self.classifier, matrix) > 0).astype(np.int64)
        return np.array([nb_predict(self.classifier, row) for row in matrix.rows], dtype=np.int64)


def fit_features(
    documents: Sequence[Document],
    feature_kind: FeatureKind,
    max_features: Optional[int] = None,
    literal_tf: bool = False,
) -> tuple[Vocabulary, Optional[TfidfStats], FeatureMatrix]:
    """Fits the vocabulary and the TF-IDF statistics and encodes the training documents."""
    tokens = [tokenize(doc.text) for doc in documents]
    vocab = fit_vocabulary(tokens, max_features=max_features)
    stats = fit_tfidf(vocab, literal_tf=literal_tf) if feature_kind is FeatureKind.TFIDF else None
    matrix = vectorize_documents(
        tokens, [doc.label for doc in documents], vocab, feature_kind, stats
    )
    return vocab, stats, matrix


def fit_classifier(matrix: FeatureMatrix, config: ClassifierConfig) -> Classifier:
    match config:
        case NbConfig():
            return nb_fit(matrix, alpha=config.alpha, fit_prior=config.fit_prior)
        case SvmConfig():
            return svm_fit(matrix, c=config.c, spec=config.kernel, cfg=config.solver)
        case _:
            raise TypeError(f"Unknown classifier configuration: {config!r}")


def fit_pipeline(
    documents: Sequence[Document],
    feature_kind: FeatureKind,
    config: ClassifierConfig,
    max_features: Optional[int] = None,
    literal_tf: bool = False,
) -> Pipeline:
    """Fit vocabulary, feature statistics and classifier on a list of training documents.

    Parameters
    ----------
    documents : Sequence[Document]
        The training documents. Nothing else is looked at.
    feature_kind : FeatureKind
        Count or TF-IDF features.
    config : NbConfig | SvmConfig
        The classifier and its hyperparameters.
    max_features : Optional[int]
        Optional vocabulary cap, see `fit_vocabulary`.
    literal_tf : bool
        Use the literal TF reading, see `TfidfStats`.

    Returns
    -------
    Pipeline
        The fitted pipeline.

    """
    vocab, stats, matrix = fit_features(documents, feature_kind, max_features, literal_tf)
    return Pipeline(
        feature_kind=feature_kind,
        vocabulary=vocab,
        tfidf_stats=stats,
        classifier=fit_classifier(matrix, config),
    )
