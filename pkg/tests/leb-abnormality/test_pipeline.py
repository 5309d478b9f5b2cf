import numpy as np
import pytest

from leb.abnormality.corpus import Corpus
from leb.abnormality.kernels import KernelKind, KernelSpec
from leb.abnormality.naive_bayes import nb_fit
from leb.abnormality.pipeline import (
    ClassifierKind,
    NbConfig,
    Pipeline,
    SvmConfig,
    fit_pipeline,
)
from leb.abnormality.vectorize import FeatureKind, fit_tfidf, fit_vocabulary, vectorize_documents


NORMAL = ["ফুল পাখি নদী", "আকাশ ফুল", "পাখি নদী আকাশ", "নদী ফুল পাখি"]
ABNORMAL = [
    "কষ্ট মৃত্যু একা",
    "ভয় কষ্ট",
    "একা মৃত্যু ভয়",
    "মৃত্যু কষ্ট ভয়",
    "একা ভয়",
    "কষ্ট একা",
]


@pytest.fixture
def toy_corpus() -> Corpus:
    """Two classes with disjoint vocabularies; abnormal is the majority."""
    return Corpus.from_records([(0, text) for text in NORMAL] + [(1, text) for text in ABNORMAL])


@pytest.mark.parametrize("feature_kind", list(FeatureKind))
@pytest.mark.parametrize(
    "config",
    [NbConfig(alpha=0.01), SvmConfig(c=10.0, kernel=KernelSpec(KernelKind.LINEAR))],
)
def test_training_sentences_get_their_labels(toy_corpus, feature_kind, config):
    pipeline = fit_pipeline(toy_corpus.documents, feature_kind, config)

    for doc in toy_corpus:
        assert pipeline.predict(doc.text) == doc.label


def test_oov_sentence_nb_predicts_prior_argmax(toy_corpus):
    pipeline = fit_pipeline(toy_corpus.documents, FeatureKind.COUNT, NbConfig())

    assert pipeline.encode("hello world").nnz == 0
    assert pipeline.predict("hello world") == 1


def test_oov_sentence_svm_predicts_sign_of_bias(toy_corpus):
    config = SvmConfig(kernel=KernelSpec(KernelKind.LINEAR))
    pipeline = fit_pipeline(toy_corpus.documents, FeatureKind.TFIDF, config)

    assert pipeline.predict("hello world") == int(pipeline.classifier.bias > 0)
    assert pipeline.decision("hello world") == pytest.approx(pipeline.classifier.bias)


def test_decision_sign_matches_prediction(toy_corpus):
    for config in (NbConfig(), SvmConfig()):
        pipeline = fit_pipeline(toy_corpus.documents, FeatureKind.TFIDF, config)
        for doc in toy_corpus:
            assert (pipeline.decision(doc.text) > 0) == bool(pipeline.predict(doc.text))


def test_predict_matrix_matches_predict(toy_corpus):
    pipeline = fit_pipeline(toy_corpus.documents, FeatureKind.TFIDF, SvmConfig())

    matrix = pipeline.transform(toy_corpus.documents)

    expected = [pipeline.predict(doc.text) for doc in toy_corpus]
    assert pipeline.predict_matrix(matrix).tolist() == expected


def test_encode_cleans_raw_text(toy_corpus):
    pipeline = fit_pipeline(toy_corpus.documents, FeatureKind.COUNT, NbConfig())

    assert pipeline.encode("<b>ফুল</b> 😀 পাখি।").entries == pipeline.encode("ফুল পাখি").entries


def test_classifier_kind(toy_corpus):
    nb = fit_pipeline(toy_corpus.documents, FeatureKind.COUNT, NbConfig())
    svm = fit_pipeline(toy_corpus.documents, FeatureKind.COUNT, SvmConfig())

    assert nb.classifier_kind is ClassifierKind.NB
    assert svm.classifier_kind is ClassifierKind.SVM
    assert nb.n_features == svm.n_features == len(nb.vocabulary)


def test_pipeline_invariants():
    docs = [("a", "b"), ("b", "c")]
    vocab = fit_vocabulary(docs)
    stats = fit_tfidf(vocab)
    model = nb_fit(vectorize_documents(docs, [0, 1], vocab, FeatureKind.COUNT))

    with pytest.raises(ValueError):
        Pipeline(FeatureKind.TFIDF, vocab, None, model)
    with pytest.raises(ValueError):
        Pipeline(FeatureKind.COUNT, vocab, stats, model)
    with pytest.raises(ValueError):
        Pipeline(FeatureKind.COUNT, fit_vocabulary([("a",)]), None, model)


def test_max_features_caps_the_dimension(toy_corpus):
    pipeline = fit_pipeline(toy_corpus.documents, FeatureKind.COUNT, NbConfig(), max_features=3)

    assert len(pipeline.vocabulary) == 3
    assert pipeline.classifier.feature_log_prob.shape == (2, 3)


@pytest.mark.parametrize("alpha", [0.0, -1.0])
def test_nb_config_validation(alpha):
    with pytest.raises(ValueError):
        NbConfig(alpha=alpha)
