import re

import pandas as pd
import pytest

from leb.abnormality.corpus import Corpus
from leb.abnormality.persist import load_model
from leb.abnormality.scripts.abnormality import EXIT_ERROR, main, parse_cli_args
from leb.abnormality.simulation import corpus_simulation


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.tsv"
    corpus_simulation(num_sentences=150, seed=3).save(path)
    return path


@pytest.fixture
def model_file(tmp_path, corpus_file):
    path = tmp_path / "model.json"
    assert main(["train", "--input", str(corpus_file), "--out", str(path)]) == 0
    return path


def test_train(tmp_path, corpus_file, capsys):
    out = tmp_path / "model.json"

    code = main(["train", "--input", str(corpus_file), "--out", str(out), "--classifier", "nb"])

    assert code == 0
    assert "accuracy" in capsys.readouterr().out
    bundle = load_model(out)
    assert bundle.metadata["trained_at"] is None
    assert bundle.metadata["seed"] == 42
    assert bundle.metadata["hyperparameters"]["classifier"] == "nb"


def test_train_is_reproducible(tmp_path, corpus_file):
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    args = ["train", "--input", str(corpus_file), "--features", "tfidf", "--kernel", "rbf"]

    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0

    assert first.read_bytes() == second.read_bytes()


def test_train_stamp(tmp_path, corpus_file):
    out = tmp_path / "model.json"

    assert main(["train", "--input", str(corpus_file), "--out", str(out), "--stamp"]) == 0

    assert load_model(out).metadata["trained_at"] is not None


def test_train_report_csv(tmp_path, corpus_file):
    report = tmp_path / "report.csv"
    out = tmp_path / "model.json"

    args = ["train", "--input", str(corpus_file), "--out", str(out), "--report-csv", str(report)]
    assert main(args) == 0

    frame = pd.read_csv(report)
    assert len(frame) == 1
    assert 0 <= frame.loc[0, "accuracy"] <= 1


def test_single_class_corpus(tmp_path, capsys):
    path = tmp_path / "single.tsv"
    Corpus.from_records([(0, "আমি ভালো আছি"), (0, "আজ বৃষ্টি")]).save(path)

    code = main(["train", "--input", str(path), "--out", str(tmp_path / "model.json")])

    assert code == EXIT_ERROR
    assert "corpus must contain both classes" in capsys.readouterr().err
    assert not (tmp_path / "model.json").exists()


def test_malformed_corpus(tmp_path, capsys):
    path = tmp_path / "bad.tsv"
    path.write_text("0\tভালো\n2\tখারাপ\n", encoding="utf-8")

    code = main(["evaluate", "--input", str(path)])

    assert code == EXIT_ERROR
    assert "invalid label at line 2" in capsys.readouterr().err


def test_predict_text(model_file, capsys):
    capsys.readouterr()

    code = main(["predict", "--model", str(model_file), "--text", "আমি আর বাঁচতে চাই না"])

    lines = capsys.readouterr().out.splitlines()
    assert code == 0
    assert len(lines) == 1
    label, score, text = lines[0].split("\t")
    assert label in ("normal", "abnormal")
    assert (label == "abnormal") == (float(score) > 0)
    assert text == "আমি আর বাঁচতে চাই না"


def test_predict_file(tmp_path, model_file, capsys):
    sentences = tmp_path / "sentences.txt"
    sentences.write_text("আজ খুব ভালো দিন\nআমি একা\n", encoding="utf-8")
    capsys.readouterr()

    assert main(["predict", "--model", str(model_file), "--input", str(sentences)]) == 0

    lines = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[2] for line in lines] == ["আজ খুব ভালো দিন", "আমি একা"]


def test_predict_empty_file(tmp_path, model_file, capsys):
    sentences = tmp_path / "empty.txt"
    sentences.write_text("", encoding="utf-8")
    capsys.readouterr()

    assert main(["predict", "--model", str(model_file), "--input", str(sentences)]) == 0

    assert capsys.readouterr().out == ""


def test_predict_missing_model(tmp_path, capsys):
    code = main(["predict", "--model", str(tmp_path / "missing.json"), "--text", "আমি"])

    assert code == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_predict_needs_a_source(tmp_path):
    with pytest.raises(SystemExit):
        parse_cli_args(["predict", "--model", str(tmp_path / "model.json")])


def test_evaluate_split(corpus_file, capsys):
    assert main(["evaluate", "--input", str(corpus_file), "--classifier", "nb"]) == 0

    assert "confusion" in capsys.readouterr().out


def test_evaluate_saved_model(corpus_file, model_file, capsys):
    capsys.readouterr()

    assert main(["evaluate", "--input", str(corpus_file), "--model", str(model_file)]) == 0

    out = capsys.readouterr().out
    total = sum(int(count) for count in re.findall(r"\b(?:tp|fp|fn|tn)=(\d+)", out))
    assert total == 150


def test_grid_search_single_cell(tmp_path, corpus_file, capsys):
    out = tmp_path / "grid.csv"
    args = [
        "grid-search",
        "--input",
        str(corpus_file),
        "--out",
        str(out),
        "--grid-c",
        "1",
        "--grid-gamma",
        "1",
        "--kernels",
        "rbf",
        "--features",
        "tfidf",
    ]

    assert main(args) == 0

    frame = pd.read_csv(out)
    assert len(frame) == 1
    assert frame.loc[0, "classifier"] == "svm"
    assert capsys.readouterr().out.startswith("best: tfidf/svm")


def test_grid_search_rows(tmp_path, corpus_file):
    out = tmp_path / "grid.csv"
    args = ["grid-search", "--input", str(corpus_file), "--out", str(out)]
    args += ["--classifiers", "nb", "svm", "--features", "tfidf", "--kernels", "linear", "rbf"]
    args += ["--grid-c", "1", "10", "--grid-gamma", "0.1", "1"]

    assert main(args) == 0

    frame = pd.read_csv(out)
    assert len(frame) == 1 + 2 * 2 * 2
    assert (frame["classifier"] == "nb").sum() == 1


def test_grid_search_without_svm_axes_keeps_both_classifiers(tmp_path, corpus_file):
    out = tmp_path / "grid.csv"
    args = ["grid-search", "--input", str(corpus_file), "--out", str(out)]
    args += ["--features", "count", "--grid-alpha", "1"]

    assert main(args) == 0

    frame = pd.read_csv(out)
    assert set(frame["classifier"]) == {"nb", "svm"}
    assert len(frame) == 1 + 2 * 3 * 3


def test_grid_search_explicit_classifiers_with_svm_axes(tmp_path, corpus_file):
    out = tmp_path / "grid.csv"
    args = ["grid-search", "--input", str(corpus_file), "--out", str(out)]
    args += ["--grid-c", "1", "--grid-gamma", "1", "--kernels", "rbf", "--features", "tfidf"]
    args += ["--classifiers", "nb", "svm"]

    assert main(args) == 0

    frame = pd.read_csv(out)
    assert list(frame["classifier"]) == ["nb", "svm"]


def test_grid_search_is_reproducible(tmp_path, corpus_file):
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    args = ["grid-search", "--input", str(corpus_file), "--classifiers", "nb", "svm"]
    args += ["--kernels", "linear", "rbf", "--grid-c", "1", "10", "--grid-gamma", "0.1", "1"]

    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second), "--jobs", "2"]) == 0

    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize(
    "extra",
    [["--split", "1.5"], ["--c", "0"], ["--gamma", "-1"], ["--max-passes", "0"]],
)
def test_invalid_arguments(tmp_path, corpus_file, capsys, extra):
    args = ["train", "--input", str(corpus_file), "--out", str(tmp_path / "model.json")]

    assert main(args + extra) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_missing_input(tmp_path, capsys):
    code = main(["evaluate", "--input", str(tmp_path / "missing.tsv")])

    assert code == EXIT_ERROR
    assert "is not a file" in capsys.readouterr().err
