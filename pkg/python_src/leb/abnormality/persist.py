"""Saving and loading trained pipelines as versioned JSON model files.

A model file is a single UTF-8 JSON object with these keys (format version 1):

```
{
  "classifier": {"type": "nb", "alpha", "fit_prior", "class_log_prior", "feature_log_prob"}
             or {"type": "svm", "c", "bias", "dimension", "dual_coef", "support_vectors",
                 "kernel": {"kind", "gamma", "coef", "conventional_sigmoid"}},
  "feature_kind": "count" | "tfidf",
  "format_version": 1,
  "metadata": {"corpus_sha256", "hyperparameters", "seed", "train_fraction", "trained_at"},
  "tfidf_stats": {"idf", "literal_tf"} | null,
  "vocabulary": {"terms", "doc_freq", "n_docs"}
}
```

Support vectors are stored sparsely as `{"indices": [...], "values": [...]}`. Keys are written in
sorted order and every real number with 17 significant digits, so a model file is a deterministic
function of the model and every 64-bit float survives the round trip exactly.

"""
from dataclasses import dataclass
import json
import logging
import math
import os
from pathlib import Path
import tempfile
from typing import Any, Optional, TypedDict

import numpy as np

from leb.abnormality.kernels import KernelKind, KernelSpec
from leb.abnormality.naive_bayes import NaiveBayesError, NbModel
from leb.abnormality.pipeline import Pipeline
from leb.abnormality.svm import SvmError, SvmModel
from leb.abnormality.vectorize import FeatureKind, SparseVector, TfidfStats, Vocabulary


logger = logging.getLogger(__name__)


FORMAT_VERSION = 1

INDENT = "  "


class ModelFormatError(Exception):
    """Raised when a model file is malformed, of an unknown version or violates an invariant."""


class ModelIOError(Exception):
    """Raised when a model file cannot be read or written."""


class Metadata(TypedDict):
    """Provenance of a trained model."""

    trained_at: Optional[str]
    corpus_sha256: str
    seed: int
    train_fraction: float
    hyperparameters: dict[str, Any]


@dataclass(frozen=True, eq=False)
class ModelBundle:
    """A trained pipeline together with its provenance."""

    pipeline: Pipeline
    metadata: Metadata
    format_version: int = FORMAT_VERSION

    @property
    def feature_kind(self) -> FeatureKind:
        return self.pipeline.feature_kind

    @property
    def vocabulary(self) -> Vocabulary:
        return self.pipeline.vocabulary

    @property
    def tfidf_stats(self) -> Optional[TfidfStats]:
        return self.pipeline.tfidf_stats

    @property
    def classifier(self) -> NbModel | SvmModel:
        return self.pipeline.classifier


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ModelFormatError(f"Cannot serialize the non-finite value {value}")
    text = format(value, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj: Any, level: int = 0) -> str:
    """JSON text with sorted keys, 17 significant digits and one dict entry per line."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(item, level + 1) for item in obj) + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        pad = INDENT * (level + 1)
        items = [
            f"{pad}{json.dumps(str(key), ensure_ascii=False)}: {_encode(obj[key], level + 1)}"
            for key in sorted(obj)
        ]
        return "{\n" + ",\n".join(items) + "\n" + INDENT * level + "}"
    raise TypeError(f"Object of type {type(obj).__name__} is not serializable")


def _classifier_to_dict(classifier: NbModel | SvmModel) -> dict[str, Any]:
    if isinstance(classifier, NbModel):
        return {
            "type": "nb",
            "alpha": float(classifier.alpha),
            "fit_prior": bool(classifier.fit_prior),
            "class_log_prior": classifier.class_log_prior.tolist(),
            "feature_log_prob": classifier.feature_log_prob.tolist(),
        }

    kernel = classifier.kernel
    return {
        "type": "svm",
        "c": float(classifier.c),
        "bias": float(classifier.bias),
        "dimension": int(classifier.dimension),
        "dual_coef": classifier.dual_coef.tolist(),
        "kernel": {
            "kind": kernel.kind.value,
            "gamma": float(kernel.gamma),
            "coef": float(kernel.coef),
            "conventional_sigmoid": bool(kernel.conventional_sigmoid),
        },
        "support_vectors": [
            {"indices": sv.indices.tolist(), "values": sv.values.tolist()}
            for sv in classifier.support_vectors
        ],
    }


def bundle_to_dict(bundle: ModelBundle) -> dict[str, Any]:
    vocab = bundle.vocabulary
    stats = bundle.tfidf_stats
    return {
        "format_version": bundle.format_version,
        "feature_kind": bundle.feature_kind.value,
        "vocabulary": {
            "terms": list(vocab.terms),
            "doc_freq": vocab.doc_freq.tolist(),
            "n_docs": int(vocab.n_docs),
        },
        "tfidf_stats": (
            None
            if stats is None
            else {"idf": stats.idf.tolist(), "literal_tf": bool(stats.literal_tf)}
        ),
        "classifier": _classifier_to_dict(bundle.classifier),
        "metadata": dict(bundle.metadata),
    }


def dumps_model(bundle: ModelBundle) -> str:
    """The exact text that `save_model` writes."""
    return _encode(bundle_to_dict(bundle)) + "\n"


def _current_umask() -> int:
    umask = os.umask(0)
    os.umask(umask)
    return umask


def save_model(bundle: ModelBundle, file_path: Path) -> None:
    """Write a model file atomically.

    The text goes to a temporary file in the target directory that is then renamed over the
    target, so a failed save never leaves a partial file behind. The file gets the permissions
    of a newly created file under the current umask.

    Parameters
    ----------
    bundle : ModelBundle
        The model to save.
    file_path : Path
        The destination.

    """
    file_path = Path(file_path)
    text = dumps_model(bundle)

    try:
        fd, tmp_name = tempfile.mkstemp(
            dir=file_path.parent, prefix=f".{file_path.name}.", suffix=".tmp"
        )
    except OSError as err:
        raise ModelIOError(f"Cannot write model file {file_path}: {err}") from err

    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        # mkstemp creates the file with mode 0600
        os.chmod(tmp_name, 0o666 & ~_current_umask())
        os.replace(tmp_name, file_path)
    except OSError as err:
        Path(tmp_name).unlink(missing_ok=True)
        raise ModelIOError(f"Cannot write model file {file_path}: {err}") from err

    logger.debug("Saved model to %s.", file_path)


def _classifier_from_dict(data: dict[str, Any]) -> NbModel | SvmModel:
    match data["type"]:
        case "nb":
            return NbModel(
                class_log_prior=np.array(data["class_log_prior"], dtype=np.float64),
                feature_log_prob=np.array(data["feature_log_prob"], dtype=np.float64),
                alpha=float(data["alpha"]),
                fit_prior=bool(data["fit_prior"]),
            )
        case "svm":
            dimension = int(data["dimension"])
            kernel = data["kernel"]
            return SvmModel(
                support_vectors=tuple(
                    SparseVector(
                        np.array(sv["indices"], dtype=np.int64),
                        np.array(sv["values"], dtype=np.float64),
                        dimension,
                    )
                    for sv in data["support_vectors"]
                ),
                dual_coef=np.array(data["dual_coef"], dtype=np.float64),
                bias=float(data["bias"]),
                kernel=KernelSpec(
                    kind=KernelKind(kernel["kind"]),
                    gamma=float(kernel["gamma"]),
                    coef=float(kernel["coef"]),
                    conventional_sigmoid=bool(kernel["conventional_sigmoid"]),
                ),
                c=float(data["c"]),
                dimension=dimension,
            )
        case other:
            raise ModelFormatError(f"Unknown classifier type {other!r}")


def bundle_from_dict(data: dict[str, Any]) -> ModelBundle:
    """Rebuilds and validates a bundle from its JSON object."""
    if not isinstance(data, dict):
        raise ModelFormatError("A model file must contain a JSON object.")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version: {version!r}")

    try:
        vocab_data = data["vocabulary"]
        vocabulary = Vocabulary(
            terms=tuple(vocab_data["terms"]),
            doc_freq=np.array(vocab_data["doc_freq"], dtype=np.int64),
            n_docs=int(vocab_data["n_docs"]),
        )
        stats_data = data["tfidf_stats"]
        stats = (
            None
            if stats_data is None
            else TfidfStats(
                idf=np.array(stats_data["idf"], dtype=np.float64),
                literal_tf=bool(stats_data["literal_tf"]),
            )
        )
        pipeline = Pipeline(
            feature_kind=FeatureKind(data["feature_kind"]),
            vocabulary=vocabulary,
            tfidf_stats=stats,
            classifier=_classifier_from_dict(data["classifier"]),
        )
        md = data["metadata"]
        metadata = Metadata(
            trained_at=md["trained_at"],
            corpus_sha256=str(md["corpus_sha256"]),
            seed=int(md["seed"]),
            train_fraction=float(md["train_fraction"]),
            hyperparameters=dict(md["hyperparameters"]),
        )
    except ModelFormatError:
        raise
    except (NaiveBayesError, SvmError) as err:
        raise ModelFormatError(str(err)) from err
    except KeyError as err:
        raise ModelFormatError(f"Malformed model file: missing key {err}") from err
    except (TypeError, ValueError) as err:
        raise ModelFormatError(f"Malformed model file: {err}") from err

    return ModelBundle(pipeline=pipeline, metadata=metadata, format_version=version)


def load_model(file_path: Path) -> ModelBundle:
    """Load and validate a model file.

    Parameters
    ----------
    file_path : Path
        The model file.

    Returns
    -------
    ModelBundle
        The validated model. Nothing is returned unless every invariant holds.

    Raises
    ------
    ModelIOError
        If the file cannot be read.
    ModelFormatError
        If the file is not valid JSON, has an unsupported version or violates an invariant.

    """
    file_path = Path(file_path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        raise ModelIOError(f"Cannot read model file {file_path}: {err}") from err

    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelFormatError(f"{file_path} is not valid JSON: {err}") from err

    bundle = bundle_from_dict(data)
    logger.debug("Loaded model from %s.", file_path)

    return bundle
