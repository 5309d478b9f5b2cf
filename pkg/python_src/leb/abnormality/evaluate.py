"""Classification metrics, pipeline evaluation on a train/test split, and grid search.

The positive class is abnormal (label 1). Precision, recall and F1 are reported for the positive
class and, in addition, macro-averaged over both classes. A ratio with a zero denominator is
reported as 0.0 and a warning is added to the report.

"""
from dataclasses import dataclass, field, replace
from enum import Enum
import logging
from pathlib import Path
from typing import Optional, Sequence

from joblib import Parallel, delayed
import numpy as np
import pandas as pd
from tqdm import tqdm

from leb.abnormality.corpus import Corpus, CorpusError, Split
from leb.abnormality.kernels import KernelKind, KernelSpec
from leb.abnormality.naive_bayes import NaiveBayesError
from leb.abnormality.pipeline import (
    ClassifierConfig,
    ClassifierKind,
    NbConfig,
    Pipeline,
    SvmConfig,
    fit_classifier,
    fit_features,
    fit_pipeline,
)
from leb.abnormality.svm import SolverConfig, SvmError
from leb.abnormality.tokenizer import tokenize
from leb.abnormality.vectorize import (
    FeatureKind,
    FeatureMatrix,
    TfidfStats,
    Vocabulary,
    VocabularyError,
    vectorize_documents,
)


logger = logging.getLogger(__name__)


CSV_COLUMNS = [
    "feature_kind",
    "classifier",
    "kernel",
    "C",
    "gamma",
    "alpha",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "error",
]


class GridSearchError(Exception):
    pass


class Criterion(Enum):
    ACCURACY = "accuracy"
    F1 = "f1"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError(f"Confusion matrix counts must be non-negative: {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _ratio(num: int, den: int, name: str, warnings: list[str]) -> float:
    if den == 0:
        warnings.append(f"{name} is undefined (zero denominator); reported as 0.0")
        return 0.0
    return num / den


def _f1(precision: float, recall: float, name: str, warnings: list[str]) -> float:
    if precision + recall == 0:
        warnings.append(f"{name} is undefined (precision + recall = 0); reported as 0.0")
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class MetricReport:
    """Test-side metrics of a classifier.

    Attributes
    ----------
    accuracy, precision, recall, f1 : float
        Accuracy and the positive-class (abnormal) precision, recall and F1.
    matrix : ConfusionMatrix
        The counts behind the metrics.
    macro_precision, macro_recall, macro_f1 : float
        The unweighted means over both classes of the per-class metrics.
    warnings : tuple[str, ...]
        One entry per metric that had a zero denominator.

    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    matrix: ConfusionMatrix
    macro_precision: float = 0.0
    macro_recall: float = 0.0
    macro_f1: float = 0.0
    warnings: tuple[str, ...] = field(default=())

    def format(self) -> str:
        """An aligned plain-text table of the report."""
        m = self.matrix
        lines = [
            f"{'metric':<10} {'abnormal':>9} {'macro':>9}",
            f"{'accuracy':<10} {self.accuracy:>9.4f}",
            f"{'precision':<10} {self.precision:>9.4f} {self.macro_precision:>9.4f}",
            f"{'recall':<10} {self.recall:>9.4f} {self.macro_recall:>9.4f}",
            f"{'f1':<10} {self.f1:>9.4f} {self.macro_f1:>9.4f}",
            f"{'confusion':<10} tp={m.tp} fp={m.fp} fn={m.fn} tn={m.tn}",
        ]
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)

    def to_dict(self) -> dict[str, float]:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "tp": self.matrix.tp,
            "fp": self.matrix.fp,
            "fn": self.matrix.fn,
            "tn": self.matrix.tn,
        }


def compute_metrics(predicted: Sequence[int], truth: Sequence[int]) -> MetricReport:
    """Compares predicted labels against true labels.

    Parameters
    ----------
    predicted : Sequence[int]
        Predicted labels, 0 or 1.
    truth : Sequence[int]
        True labels, 0 or 1, of the same length.

    Returns
    -------
    MetricReport
        Accuracy, positive-class and macro-averaged precision, recall and F1.

    """
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise ValueError(
            f"Predictions and labels must be 1D and of equal length. Actual shapes: "
            f"{predicted.shape}, {truth.shape}"
        )
    if len(truth) == 0:
        raise ValueError("Cannot compute metrics on zero documents.")
    for name, labels in (("predicted", predicted), ("truth", truth)):
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError(f"All {name} labels must be 0 or 1.")

    matrix = ConfusionMatrix(
        tp=int(np.sum((predicted == 1) & (truth == 1))),
        fp=int(np.sum((predicted == 1) & (truth == 0))),
        fn=int(np.sum((predicted == 0) & (truth == 1))),
        tn=int(np.sum((predicted == 0) & (truth == 0))),
    )

    warnings: list[str] = []
    precision = _ratio(matrix.tp, matrix.tp + matrix.fp, "precision", warnings)
    recall = _ratio(matrix.tp, matrix.tp + matrix.fn, "recall", warnings)
    f1 = _f1(precision, recall, "f1", warnings)

    # The same metrics with normal as the positive class, for the macro averages
    neg_precision = _ratio(matrix.tn, matrix.tn + matrix.fn, "normal precision", warnings)
    neg_recall = _ratio(matrix.tn, matrix.tn + matrix.fp, "normal recall", warnings)
    neg_f1 = _f1(neg_precision, neg_recall, "normal f1", warnings)

    return MetricReport(
        accuracy=(matrix.tp + matrix.tn) / matrix.total,
        precision=precision,
        recall=recall,
        f1=f1,
        matrix=matrix,
        macro_precision=(precision + neg_precision) / 2,
        macro_recall=(recall + neg_recall) / 2,
        macro_f1=(f1 + neg_f1) / 2,
        warnings=tuple(warnings),
    )


def _check_split(corpus: Corpus, split: Split) -> None:
    if split.train_ids | split.test_ids != set(range(len(corpus))):
        raise ValueError("The split does not partition the ids of the corpus.")


def evaluate_pipeline(
    corpus: Corpus,
    split: Split,
    feature_kind: FeatureKind,
    classifier_config: ClassifierConfig,
    max_features: Optional[int] = None,
    literal_tf: bool = False,
) -> MetricReport:
    """Fit a pipeline on the training side of a split and score it on the test side.

    The vocabulary, the TF-IDF statistics and the classifier only ever see training documents.

    Parameters
    ----------
    corpus : Corpus
        The labeled corpus.
    split : Split
        A partition of the corpus ids.
    feature_kind : FeatureKind
        Count or TF-IDF features.
    classifier_config : NbConfig | SvmConfig
        The classifier and its hyperparameters.
    max_features : Optional[int]
        Optional vocabulary cap.
    literal_tf : bool
        Use the literal TF reading.

    Returns
    -------
    MetricReport
        Metrics on the test side.

    """
    _check_split(corpus, split)

    pipeline = fit_pipeline(
        corpus.subset(split.train_ids),
        feature_kind,
        classifier_config,
        max_features=max_features,
        literal_tf=literal_tf,
    )
    test = pipeline.transform(corpus.subset(split.test_ids))

    return compute_metrics(pipeline.predict_matrix(test), test.labels)


@dataclass(frozen=True)
class GridSpec:
    """The axes of a grid search.

    SVM cells span kernels x C x gamma; Naive Bayes cells ignore those axes and span the
    smoothing priors only. Both are repeated for every feature kind.

    """

    kernels: tuple[KernelKind, ...] = (KernelKind.LINEAR, KernelKind.RBF)
    c_values: tuple[float, ...] = (1.0, 10.0, 100.0)
    gamma_values: tuple[float, ...] = (0.01, 0.1, 1.0)
    feature_kinds: tuple[FeatureKind, ...] = (FeatureKind.COUNT, FeatureKind.TFIDF)
    classifiers: tuple[ClassifierKind, ...] = (ClassifierKind.NB, ClassifierKind.SVM)
    nb_alphas: tuple[float, ...] = (1.0,)
    fit_prior: bool = True
    coef: float = 0.0
    conventional_sigmoid: bool = False
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        for name in (
            "kernels",
            "c_values",
            "gamma_values",
            "feature_kinds",
            "classifiers",
            "nb_alphas",
        ):
            values = tuple(getattr(self, name))
            object.__setattr__(self, name, values)
            if not values:
                raise ValueError(f"The grid axis {name} must not be empty.")
        for name in ("c_values", "gamma_values", "nb_alphas"):
            if not all(v > 0 for v in getattr(self, name)):
                raise ValueError(f"All {name} must be positive: {getattr(self, name)}")

    def cells(self) -> list["GridCell"]:
        """Every configuration of the grid, in deterministic order."""
        cells = []
        for feature_kind in self.feature_kinds:
            for classifier in self.classifiers:
                match classifier:
                    case ClassifierKind.NB:
                        for alpha in self.nb_alphas:
                            cells.append(GridCell(feature_kind, classifier, alpha=alpha))
                    case ClassifierKind.SVM:
                        for kernel in self.kernels:
                            for c in self.c_values:
                                for gamma in self.gamma_values:
                                    cell = GridCell(
                                        feature_kind, classifier, kernel=kernel, c=c, gamma=gamma
                                    )
                                    cells.append(cell)
        return cells


def default_grid() -> GridSpec:
    return GridSpec()


@dataclass(frozen=True)
class GridCell:
    feature_kind: FeatureKind
    classifier: ClassifierKind
    kernel: Optional[KernelKind] = None
    c: Optional[float] = None
    gamma: Optional[float] = None
    alpha: Optional[float] = None

    def config(self, grid: GridSpec) -> ClassifierConfig:
        if self.classifier is ClassifierKind.NB:
            return NbConfig(alpha=self.alpha, fit_prior=grid.fit_prior)
        spec = KernelSpec(
            kind=self.kernel,
            gamma=self.gamma,
            coef=grid.coef,
            conventional_sigmoid=grid.conventional_sigmoid,
        )
        return SvmConfig(c=self.c, kernel=spec, solver=grid.solver)

    def training_key(self) -> "GridCell":
        """The cell that trains the same classifier. The linear kernel ignores gamma."""
        if self.kernel is KernelKind.LINEAR:
            return replace(self, gamma=KernelSpec().gamma)
        return self

    def describe(self) -> str:
        if self.classifier is ClassifierKind.NB:
            return f"{self.feature_kind.value}/nb alpha={self.alpha:g}"
        return (
            f"{self.feature_kind.value}/svm kernel={self.kernel.value} C={self.c:g} "
            f"gamma={self.gamma:g}"
        )


@dataclass(frozen=True)
class GridRow:
    cell: GridCell
    report: Optional[MetricReport] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class GridResult:
    """The outcome of a grid search.

    Attributes
    ----------
    rows : tuple[GridRow, ...]
        One row per grid cell, in grid order.
    best : int
        Index of the row with the best criterion value; ties go to the earlier row.
    criterion : Criterion
        The model selection criterion.

    """

    rows: tuple[GridRow, ...]
    best: int
    criterion: Criterion = Criterion.ACCURACY

    @property
    def best_row(self) -> GridRow:
        return self.rows[self.best]

    def to_frame(self) -> pd.DataFrame:
        records = []
        for row in self.rows:
            cell = row.cell
            report = row.report
            records.append(
                {
                    "feature_kind": cell.feature_kind.value,
                    "classifier": cell.classifier.value,
                    "kernel": cell.kernel.value if cell.kernel is not None else None,
                    "C": cell.c,
                    "gamma": cell.gamma,
                    "alpha": cell.alpha,
                    "accuracy": report.accuracy if report else None,
                    "precision": report.precision if report else None,
                    "recall": report.recall if report else None,
                    "f1": report.f1 if report else None,
                    "error": row.error,
                }
            )
        return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)

    def to_csv(self, file_path: Path) -> None:
        """Write the result as UTF-8 CSV with one row per grid cell."""
        self.to_frame().to_csv(file_path, index=False, encoding="utf-8", lineterminator="\n")


@dataclass(frozen=True, eq=False)
class _SplitFeatures:
    """Vocabulary, statistics and both encoded sides of a split for one feature kind."""

    feature_kind: FeatureKind
    vocabulary: Vocabulary
    tfidf_stats: Optional[TfidfStats]
    train: FeatureMatrix
    test: FeatureMatrix


def _fit_split_features(corpus: Corpus, split: Split, feature_kind: FeatureKind) -> _SplitFeatures:
    vocab, stats, train = fit_features(corpus.subset(split.train_ids), feature_kind)
    test_docs = corpus.subset(split.test_ids)
    test = vectorize_documents(
        [tokenize(doc.text) for doc in test_docs],
        [doc.label for doc in test_docs],
        vocab,
        feature_kind,
        stats,
    )
    return _SplitFeatures(feature_kind, vocab, stats, train, test)


def _evaluate_cell(
    features: _SplitFeatures, cell: GridCell, grid: GridSpec
) -> tuple[Optional[MetricReport], Optional[str]]:
    try:
        classifier = fit_classifier(features.train, cell.config(grid))
        pipeline = Pipeline(
            feature_kind=features.feature_kind,
            vocabulary=features.vocabulary,
            tfidf_stats=features.tfidf_stats,
            classifier=classifier,
        )
        report = compute_metrics(pipeline.predict_matrix(features.test), features.test.labels)
    except (NaiveBayesError, SvmError, ValueError) as err:
        logger.warning("Grid cell %s failed: %s", cell.describe(), err)
        return None, str(err)
    logger.debug("Grid cell %s: accuracy %.4f", cell.describe(), report.accuracy)
    return report, None


def grid_search(
    corpus: Corpus,
    split: Split,
    grid: GridSpec,
    jobs: int = 1,
    criterion: Criterion = Criterion.ACCURACY,
    show_progress: bool = False,
) -> GridResult:
    """Evaluate every cell of a grid on one train/test split.

    The vocabulary and the TF-IDF statistics are fitted once per feature kind. Linear SVM cells
    that differ only in gamma train a single classifier and share its report.

    Parameters
    ----------
    corpus : Corpus
        The labeled corpus.
    split : Split
        The train/test split shared by all cells.
    grid : GridSpec
        The grid.
    jobs : int
        Number of classifiers trained concurrently. Rows come back in grid order regardless.
    criterion : Criterion
        Select the best cell by accuracy or by F1.
    show_progress : bool
        Whether to show a progress bar.

    Returns
    -------
    GridResult
        One row per cell. A cell whose training fails carries the error message instead of a
        report.

    """
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1. Actual: {jobs}")
    _check_split(corpus, split)

    features: dict[FeatureKind, _SplitFeatures | str] = {}
    for feature_kind in grid.feature_kinds:
        try:
            features[feature_kind] = _fit_split_features(corpus, split, feature_kind)
        except (CorpusError, VocabularyError, ValueError) as err:
            logger.warning("Fitting %s features failed: %s", feature_kind.value, err)
            features[feature_kind] = str(err)

    cells = grid.cells()
    keys = list(
        dict.fromkeys(
            cell.training_key()
            for cell in cells
            if isinstance(features[cell.feature_kind], _SplitFeatures)
        )
    )
    key_iter = tqdm(keys) if show_progress else keys
    if jobs == 1:
        outcomes = [_evaluate_cell(features[key.feature_kind], key, grid) for key in key_iter]
    else:
        outcomes = Parallel(n_jobs=jobs)(
            delayed(_evaluate_cell)(features[key.feature_kind], key, grid) for key in key_iter
        )
    by_key = dict(zip(keys, outcomes))

    rows = []
    for cell in cells:
        fitted = features[cell.feature_kind]
        if isinstance(fitted, str):
            rows.append(GridRow(cell, error=fitted))
            continue
        report, error = by_key[cell.training_key()]
        rows.append(GridRow(cell, report=report, error=error))

    best, best_value = -1, -np.inf
    for idx, row in enumerate(rows):
        if row.report is None:
            continue
        value = getattr(row.report, criterion.value)
        if value > best_value:
            best, best_value = idx, value

    if best < 0:
        raise GridSearchError("Every grid cell failed; see the log for the errors.")

    logger.info(
        "Best grid cell: %s (%s %.4f)", rows[best].cell.describe(), criterion.value, best_value
    )

    return GridResult(rows=tuple(rows), best=best, criterion=criterion)
