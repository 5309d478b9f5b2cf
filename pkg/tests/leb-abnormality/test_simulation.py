import pytest

from leb.abnormality.corpus import Label, clean_text, split_corpus
from leb.abnormality.evaluate import GridSpec, default_grid, grid_search
from leb.abnormality.kernels import KernelKind
from leb.abnormality.simulation import corpus_simulation


def test_default_class_balance():
    corpus = corpus_simulation()

    assert len(corpus) == 2000
    assert corpus.label_counts() == (1186, 814)


def test_simulation_is_deterministic():
    first = corpus_simulation(num_sentences=300, seed=7)
    second = corpus_simulation(num_sentences=300, seed=7)
    other = corpus_simulation(num_sentences=300, seed=8)

    assert first.to_tsv() == second.to_tsv()
    assert first.to_tsv() != other.to_tsv()


def test_sentences_are_clean():
    corpus = corpus_simulation(num_sentences=300, seed=1)

    for doc in corpus:
        assert doc.text == clean_text(doc.text)
        assert doc.text
        assert doc.label in (Label.NORMAL, Label.ABNORMAL)


def test_tiny_fraction_keeps_both_classes():
    corpus = corpus_simulation(num_sentences=10, abnormal_fraction=0.01)

    assert corpus.label_counts() == (9, 1)


@pytest.mark.parametrize(
    "num_sentences, abnormal_fraction", [(1, 0.5), (100, 0.0), (100, 1.0), (100, -0.5)]
)
def test_invalid_parameters(num_sentences, abnormal_fraction):
    with pytest.raises(ValueError):
        corpus_simulation(num_sentences=num_sentences, abnormal_fraction=abnormal_fraction)


def test_acceptance_grid():
    corpus = corpus_simulation()
    split = split_corpus(corpus, 0.7, seed=42)
    grid = GridSpec(kernels=(KernelKind.RBF,), c_values=(1.0,), gamma_values=(1.0,))

    result = grid_search(corpus, split, grid)

    frame = result.to_frame()
    assert len(frame) == 4
    assert set(zip(frame["feature_kind"], frame["classifier"])) == {
        ("count", "nb"),
        ("count", "svm"),
        ("tfidf", "nb"),
        ("tfidf", "svm"),
    }
    assert frame["error"].isna().all()
    assert result.best_row.report.accuracy >= 0.85


def test_default_grid_on_simulated_corpus():
    corpus = corpus_simulation()
    split = split_corpus(corpus, 0.7, seed=42)

    result = grid_search(corpus, split, default_grid())

    frame = result.to_frame()
    assert len(frame) == len(default_grid().cells()) == 38
    assert frame["error"].isna().all()
    assert len(set(zip(frame["feature_kind"], frame["classifier"]))) == 4
    assert result.best_row.report.accuracy >= 0.85
