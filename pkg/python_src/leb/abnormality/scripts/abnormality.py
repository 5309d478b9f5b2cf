"""Command line interface to train, evaluate and apply abnormality classifiers.

Examples
--------

Train the default TF-IDF / RBF SVM (C = 1, gamma = 1) on 70% of a labeled corpus, print the
metrics on the remaining 30% and save the model.

```console
abnormality train --input data.tsv --features tfidf --classifier svm --c 1 --gamma 1 \
    --kernel rbf --out model.json
```

Classify the sentences of a file, one per line. Each output line is `label<TAB>score<TAB>text`.

```console
abnormality predict --model model.json --input sentences.txt
```

Search the default grid with four concurrent workers and write one CSV row per cell.

```console
abnormality grid-search --input data.tsv --out grid.csv --jobs 4
```

Input corpora are UTF-8 files with one `label<TAB>text` record per line, where the label is 0
(normal) or 1 (abnormal). The `-d` flag prints debug messages.

"""
import argparse
from dataclasses import dataclass
from datetime import datetime, timezone
import logging
from pathlib import Path
import sys
from typing import Any, Optional

import pandas as pd

from leb.abnormality import (
    ClassifierKind,
    CorpusError,
    Criterion,
    FeatureKind,
    GridSearchError,
    GridSpec,
    KernelKind,
    KernelSpec,
    Label,
    Metadata,
    MetricReport,
    ModelBundle,
    ModelFormatError,
    ModelIOError,
    NaiveBayesError,
    NbConfig,
    SolverConfig,
    SvmConfig,
    SvmError,
    VocabularyError,
    compute_metrics,
    default_grid,
    evaluate_pipeline,
    fit_pipeline,
    grid_search,
    load_corpus,
    load_model,
    save_model,
    split_corpus,
)
from leb.abnormality.pipeline import ClassifierConfig


logger = logging.getLogger(__name__)


DEFAULT_ALPHA = 1.0
DEFAULT_C = 1.0
DEFAULT_CLASSIFIER = ClassifierKind.SVM.value
DEFAULT_COEF = 0.0
DEFAULT_CRITERION = Criterion.ACCURACY.value
DEFAULT_FEATURES = FeatureKind.TFIDF.value
DEFAULT_GAMMA = 1.0
DEFAULT_JOBS = 1
DEFAULT_KERNEL = KernelKind.RBF.value
DEFAULT_MAX_PASSES = 1000
DEFAULT_SEED = 42
DEFAULT_SPLIT = 0.7
DEFAULT_TOLERANCE = 1e-3

EXIT_ERROR = 2

CLI_ERRORS = (
    CorpusError,
    GridSearchError,
    ModelFormatError,
    ModelIOError,
    NaiveBayesError,
    OSError,
    SvmError,
    ValueError,
    VocabularyError,
)

LABEL_NAMES = {Label.NORMAL: "normal", Label.ABNORMAL: "abnormal"}


def _add_split_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--input",
        type=Path,
        required=True,
        help="The labeled corpus, one 'label<TAB>text' record per line.",
    )

    parser.add_argument(
        "--split",
        type=float,
        default=DEFAULT_SPLIT,
        help=f"The share of documents used for training. (default: {DEFAULT_SPLIT})",
    )

    parser.add_argument(
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        help=f"The seed of the train/test shuffle. (default: {DEFAULT_SEED})",
    )

    parser.add_argument(
        "--stratify",
        action="store_true",
        default=False,
        help="Keep the class ratio on both sides of the split. (default: False)",
    )


def _add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--coef",
        type=float,
        default=DEFAULT_COEF,
        help=f"The offset r of the polynomial and sigmoid kernels. (default: {DEFAULT_COEF})",
    )

    parser.add_argument(
        "--conventional-sigmoid",
        action="store_true",
        default=False,
        help="Use tanh(gamma x.z + r) as the sigmoid kernel. (default: False)",
    )

    parser.add_argument(
        "--tolerance",
        type=float,
        default=DEFAULT_TOLERANCE,
        help=f"The KKT tolerance of the SVM solver. (default: {DEFAULT_TOLERANCE})",
    )

    parser.add_argument(
        "--max-passes",
        type=int,
        default=DEFAULT_MAX_PASSES,
        help=f"The iteration budget of the SVM solver in passes. (default: {DEFAULT_MAX_PASSES})",
    )


def _add_pipeline_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--features",
        type=str,
        choices=[kind.value for kind in FeatureKind],
        default=DEFAULT_FEATURES,
        help=f"The feature extraction method. (default: {DEFAULT_FEATURES})",
    )

    parser.add_argument(
        "--classifier",
        type=str,
        choices=[kind.value for kind in ClassifierKind],
        default=DEFAULT_CLASSIFIER,
        help=f"The classifier. (default: {DEFAULT_CLASSIFIER})",
    )

    parser.add_argument(
        "--c",
        type=float,
        default=DEFAULT_C,
        help=f"The SVM regularization constant C. (default: {DEFAULT_C})",
    )

    parser.add_argument(
        "--gamma",
        type=float,
        default=DEFAULT_GAMMA,
        help=f"The SVM kernel scale gamma. (default: {DEFAULT_GAMMA})",
    )

    parser.add_argument(
        "--kernel",
        type=str,
        choices=[kind.value for kind in KernelKind],
        default=DEFAULT_KERNEL,
        help=f"The SVM kernel. (default: {DEFAULT_KERNEL})",
    )

    parser.add_argument(
        "--alpha",
        type=float,
        default=DEFAULT_ALPHA,
        help=f"The Naive Bayes smoothing prior. (default: {DEFAULT_ALPHA})",
    )

    parser.add_argument(
        "--no-fit-prior",
        dest="fit_prior",
        action="store_false",
        default=True,
        help="Use uniform Naive Bayes class priors instead of the class frequencies.",
    )

    parser.add_argument(
        "--max-features",
        type=int,
        default=None,
        help="Keep only the terms with the highest document frequency. (default: all terms)",
    )

    parser.add_argument(
        "--literal-tf",
        action="store_true",
        default=False,
        help="Set the term frequency of every present term to 1. (default: False)",
    )

    parser.add_argument(
        "--report-csv",
        type=Path,
        default=None,
        help="Also write the test metrics to this CSV file.",
    )

    _add_solver_args(parser)


def parse_cli_args(args: list[str]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="abnormality",
        description="Trains, evaluates and applies classifiers of abnormal Bengali sentences.",
    )

    parser.add_argument(
        "-d",
        "--debug",
        action="store_true",
        default=False,
        help="Enable debug logging. (default: False)",
    )

    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="Train a model and save it.")
    _add_split_args(train)
    _add_pipeline_args(train)
    train.add_argument("--out", type=Path, required=True, help="Where to save the model.")
    train.add_argument(
        "--stamp",
        action="store_true",
        default=False,
        help="Record the training time in the model file. (default: False)",
    )

    evaluate = commands.add_parser(
        "evaluate",
        help="Score a saved model on a whole corpus, or train and score on a split.",
    )
    _add_split_args(evaluate)
    _add_pipeline_args(evaluate)
    evaluate.add_argument(
        "--model",
        type=Path,
        default=None,
        help="A saved model. If given, every document of the input is a test document.",
    )

    predict = commands.add_parser("predict", help="Classify sentences with a saved model.")
    predict.add_argument("--model", type=Path, required=True, help="The saved model.")
    source = predict.add_mutually_exclusive_group(required=True)
    source.add_argument("--text", type=str, help="A single sentence.")
    source.add_argument("--input", type=Path, help="A UTF-8 file with one sentence per line.")

    grid = commands.add_parser("grid-search", help="Evaluate every cell of a hyperparameter grid.")
    _add_split_args(grid)
    _add_solver_args(grid)
    grid.add_argument("--out", type=Path, required=True, help="Where to write the CSV report.")
    grid.add_argument(
        "--features",
        nargs="+",
        choices=[kind.value for kind in FeatureKind],
        default=None,
        help="Feature extraction methods. (default: all)",
    )
    grid.add_argument(
        "--classifiers",
        nargs="+",
        choices=[kind.value for kind in ClassifierKind],
        default=None,
        help=(
            "Classifiers. (default: nb svm, or svm alone if --kernels, --grid-c or --grid-gamma "
            "is given)"
        ),
    )
    grid.add_argument(
        "--kernels",
        nargs="+",
        choices=[kind.value for kind in KernelKind],
        default=None,
        help="SVM kernels. (default: linear rbf)",
    )
    grid.add_argument(
        "--grid-c", nargs="+", type=float, default=None, help="SVM C values. (default: 1 10 100)"
    )
    grid.add_argument(
        "--grid-gamma",
        nargs="+",
        type=float,
        default=None,
        help="SVM gamma values. (default: 0.01 0.1 1)",
    )
    grid.add_argument(
        "--grid-alpha",
        nargs="+",
        type=float,
        default=None,
        help="Naive Bayes smoothing priors. (default: 1)",
    )
    grid.add_argument(
        "--jobs",
        type=int,
        default=DEFAULT_JOBS,
        help=f"The number of grid cells evaluated concurrently. (default: {DEFAULT_JOBS})",
    )
    grid.add_argument(
        "--criterion",
        type=str,
        choices=[criterion.value for criterion in Criterion],
        default=DEFAULT_CRITERION,
        help=f"The model selection criterion. (default: {DEFAULT_CRITERION})",
    )
    grid.add_argument(
        "--progress",
        action="store_true",
        default=False,
        help="Show a progress bar over the grid cells. (default: False)",
    )

    return parser.parse_args(args)


def _check_output(path: Optional[Path]) -> None:
    if path is not None and not path.parent.is_dir():
        raise ValueError(f"The directory of {path} does not exist.")


def validate_args(args: argparse.Namespace) -> None:
    logger.debug("Validating CLI arguments.")

    if args.input is not None and not args.input.is_file():
        raise ValueError(f"{args.input} is not a file.")

    model = getattr(args, "model", None)
    if model is not None and not model.is_file():
        raise ValueError(f"The model file {model} does not exist.")

    if args.command == "predict":
        return

    if not 0 < args.split < 1:
        raise ValueError(f"The split fraction must lie in (0, 1). Actual: {args.split}")

    if args.seed < 0:
        raise ValueError(f"The seed must be non-negative. Actual: {args.seed}")

    if args.tolerance <= 0:
        raise ValueError(f"The solver tolerance must be positive. Actual: {args.tolerance}")

    if args.max_passes < 1:
        raise ValueError(f"The pass budget must be at least 1. Actual: {args.max_passes}")

    if args.command == "grid-search":
        for name in ("grid_c", "grid_gamma", "grid_alpha"):
            values = getattr(args, name)
            if values is not None and min(values) <= 0:
                raise ValueError(f"All --{name.replace('_', '-')} values must be positive.")
        if args.jobs < 1:
            raise ValueError(f"The number of jobs must be at least 1. Actual: {args.jobs}")
        _check_output(args.out)
        return

    if args.c <= 0:
        raise ValueError(f"C must be positive. Actual: {args.c}")

    if args.gamma <= 0:
        raise ValueError(f"gamma must be positive. Actual: {args.gamma}")

    if args.alpha <= 0:
        raise ValueError(f"alpha must be positive. Actual: {args.alpha}")

    if args.max_features is not None and args.max_features < 1:
        raise ValueError(f"--max-features must be at least 1. Actual: {args.max_features}")

    _check_output(getattr(args, "out", None))
    _check_output(args.report_csv)


@dataclass(frozen=True)
class CliConfig:
    """The resolved configuration of a CLI run."""

    command: str
    input_path: Optional[Path] = None
    model_path: Optional[Path] = None
    output_path: Optional[Path] = None
    report_csv: Optional[Path] = None
    text: Optional[str] = None
    feature_kind: FeatureKind = FeatureKind.TFIDF
    classifier: ClassifierConfig = SvmConfig()
    split_fraction: float = DEFAULT_SPLIT
    seed: int = DEFAULT_SEED
    stratify: bool = False
    max_features: Optional[int] = None
    literal_tf: bool = False
    stamp: bool = False
    grid: Optional[GridSpec] = None
    jobs: int = DEFAULT_JOBS
    criterion: Criterion = Criterion.ACCURACY
    progress: bool = False

    def hyperparameters(self) -> dict[str, Any]:
        """The settings that determine a trained model, as stored in its metadata."""
        params: dict[str, Any] = {
            "feature_kind": self.feature_kind.value,
            "classifier": self.classifier.kind.value,
            "max_features": self.max_features,
            "literal_tf": self.literal_tf,
            "stratify": self.stratify,
        }
        match self.classifier:
            case NbConfig():
                params.update(alpha=self.classifier.alpha, fit_prior=self.classifier.fit_prior)
            case SvmConfig():
                kernel = self.classifier.kernel
                params.update(
                    c=self.classifier.c,
                    kernel=kernel.kind.value,
                    gamma=kernel.gamma,
                    coef=kernel.coef,
                    conventional_sigmoid=kernel.conventional_sigmoid,
                    tolerance=self.classifier.solver.tolerance,
                    max_passes=self.classifier.solver.max_passes,
                )
        return params


def _solver(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(tolerance=args.tolerance, max_passes=args.max_passes)


def _grid(args: argparse.Namespace) -> GridSpec:
    defaults = default_grid()

    def axis(values, convert, default):
        return default if values is None else tuple(convert(v) for v in values)

    classifiers = defaults.classifiers
    if args.classifiers is None and any(
        values is not None for values in (args.kernels, args.grid_c, args.grid_gamma)
    ):
        # Only SVM cells have these axes
        classifiers = (ClassifierKind.SVM,)

    return GridSpec(
        kernels=axis(args.kernels, KernelKind, defaults.kernels),
        c_values=axis(args.grid_c, float, defaults.c_values),
        gamma_values=axis(args.grid_gamma, float, defaults.gamma_values),
        feature_kinds=axis(args.features, FeatureKind, defaults.feature_kinds),
        classifiers=axis(args.classifiers, ClassifierKind, classifiers),
        nb_alphas=axis(args.grid_alpha, float, defaults.nb_alphas),
        coef=args.coef,
        conventional_sigmoid=args.conventional_sigmoid,
        solver=_solver(args),
    )


def setup(args: argparse.Namespace) -> CliConfig:
    """Resolves the parsed arguments into a run configuration."""
    logger.debug("Setting up the %s command.", args.command)

    match args.command:
        case "predict":
            return CliConfig(
                command=args.command,
                input_path=args.input,
                model_path=args.model,
                text=args.text,
            )
        case "grid-search":
            return CliConfig(
                command=args.command,
                input_path=args.input,
                output_path=args.out,
                split_fraction=args.split,
                seed=args.seed,
                stratify=args.stratify,
                grid=_grid(args),
                jobs=args.jobs,
                criterion=Criterion(args.criterion),
                progress=args.progress,
            )

    classifier: ClassifierConfig
    if args.classifier == ClassifierKind.NB.value:
        classifier = NbConfig(alpha=args.alpha, fit_prior=args.fit_prior)
    else:
        kernel = KernelSpec(
            kind=KernelKind(args.kernel),
            gamma=args.gamma,
            coef=args.coef,
            conventional_sigmoid=args.conventional_sigmoid,
        )
        classifier = SvmConfig(c=args.c, kernel=kernel, solver=_solver(args))

    return CliConfig(
        command=args.command,
        input_path=args.input,
        model_path=args.out if args.command == "train" else args.model,
        report_csv=args.report_csv,
        feature_kind=FeatureKind(args.features),
        classifier=classifier,
        split_fraction=args.split,
        seed=args.seed,
        stratify=args.stratify,
        max_features=args.max_features,
        literal_tf=args.literal_tf,
        stamp=getattr(args, "stamp", False),
    )


def write_report_csv(report: MetricReport, file_path: Path) -> None:
    frame = pd.DataFrame.from_records([report.to_dict()])
    frame.to_csv(file_path, index=False, encoding="utf-8", lineterminator="\n")


def _print_report(report: MetricReport, cfg: CliConfig) -> None:
    print(report.format())
    if cfg.report_csv is not None:
        write_report_csv(report, cfg.report_csv)


def cmd_train(cfg: CliConfig) -> ModelBundle:
    """Fits a pipeline on the training side, prints the test metrics and saves the model."""
    corpus = load_corpus(cfg.input_path)
    corpus.check_both_classes()
    split = split_corpus(corpus, cfg.split_fraction, cfg.seed, stratify=cfg.stratify)

    pipeline = fit_pipeline(
        corpus.subset(split.train_ids),
        cfg.feature_kind,
        cfg.classifier,
        max_features=cfg.max_features,
        literal_tf=cfg.literal_tf,
    )
    test = pipeline.transform(corpus.subset(split.test_ids))
    report = compute_metrics(pipeline.predict_matrix(test), test.labels)

    trained_at = datetime.now(timezone.utc).isoformat(timespec="seconds") if cfg.stamp else None
    bundle = ModelBundle(
        pipeline=pipeline,
        metadata=Metadata(
            trained_at=trained_at,
            corpus_sha256=corpus.fingerprint(),
            seed=cfg.seed,
            train_fraction=cfg.split_fraction,
            hyperparameters=cfg.hyperparameters(),
        ),
    )

    logger.info("Saving the model to %s", cfg.model_path)
    save_model(bundle, cfg.model_path)
    _print_report(report, cfg)

    return bundle


def cmd_evaluate(cfg: CliConfig) -> MetricReport:
    corpus = load_corpus(cfg.input_path)

    if cfg.model_path is not None:
        pipeline = load_model(cfg.model_path).pipeline
        matrix = pipeline.transform(corpus.documents)
        report = compute_metrics(pipeline.predict_matrix(matrix), matrix.labels)
    else:
        corpus.check_both_classes()
        split = split_corpus(corpus, cfg.split_fraction, cfg.seed, stratify=cfg.stratify)
        report = evaluate_pipeline(
            corpus,
            split,
            cfg.feature_kind,
            cfg.classifier,
            max_features=cfg.max_features,
            literal_tf=cfg.literal_tf,
        )

    _print_report(report, cfg)

    return report


def cmd_predict(cfg: CliConfig) -> None:
    """Prints `label<TAB>score<TAB>text` for every input sentence."""
    pipeline = load_model(cfg.model_path).pipeline

    if cfg.text is not None:
        sentences = [cfg.text]
    else:
        with cfg.input_path.open("r", encoding="utf-8") as f:
            sentences = f.read().splitlines()

    for sentence in sentences:
        x = pipeline.encode(sentence)
        label = pipeline.predict_vector(x)
        score = pipeline.decision_vector(x)
        print(f"{LABEL_NAMES[label]}\t{score:.6f}\t{sentence}")


def cmd_grid_search(cfg: CliConfig) -> None:
    corpus = load_corpus(cfg.input_path)
    corpus.check_both_classes()
    split = split_corpus(corpus, cfg.split_fraction, cfg.seed, stratify=cfg.stratify)

    result = grid_search(
        corpus,
        split,
        cfg.grid,
        jobs=cfg.jobs,
        criterion=cfg.criterion,
        show_progress=cfg.progress,
    )
    logger.info("Writing %d grid rows to %s", len(result.rows), cfg.output_path)
    result.to_csv(cfg.output_path)

    best = result.best_row
    print(f"best: {best.cell.describe()}")
    print(best.report.format())


def run(cfg: CliConfig) -> None:
    logger.info("Resolved configuration: %s", cfg)

    match cfg.command:
        case "train":
            cmd_train(cfg)
        case "evaluate":
            cmd_evaluate(cfg)
        case "predict":
            cmd_predict(cfg)
        case "grid-search":
            cmd_grid_search(cfg)
        case other:
            raise ValueError(f"Unknown command {other!r}")


def main(args: Optional[list[str]] = None) -> int:
    args = parse_cli_args(sys.argv[1:] if args is None else args)

    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
    )

    try:
        validate_args(args)
        cfg = setup(args)
        run(cfg)
    except CLI_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR

    logger.info("Done!")

    return 0


if __name__ == "__main__":
    sys.exit(main())
