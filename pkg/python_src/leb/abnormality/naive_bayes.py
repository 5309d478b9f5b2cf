"""Multinomial Naive Bayes with additive smoothing.

The per-class feature probabilities are estimated as

    theta_ci = (N_ci + alpha) / (N_c + alpha * n)

where N_ci is the sum of feature i over the training rows of class c, N_c = sum_i N_ci and n is
the number of features. alpha = 1 is Laplace smoothing and alpha < 1 is Lidstone smoothing.
All arithmetic happens in log space. Feature values act as (possibly fractional) event counts, so
TF-IDF rows are accepted as well as count rows.

"""
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from leb.abnormality.vectorize import FeatureMatrix, SparseVector


NORMALIZATION_TOL = 1e-9

NUM_CLASSES = 2


class NaiveBayesError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class NbModel:
    """A fitted multinomial Naive Bayes model.

    Attributes
    ----------
    class_log_prior : NDArray[np.float64]
        log P(c) for each class.
    feature_log_prob : NDArray[np.float64]
        A classes x features array of log theta_ci.
    alpha : float
        The smoothing prior.
    fit_prior : bool
        Whether the priors were learned from the class frequencies or set uniform.

    """

    class_log_prior: NDArray[np.float64]
    feature_log_prob: NDArray[np.float64]
    alpha: float
    fit_prior: bool = True

    def __post_init__(self):
        object.__setattr__(self, "class_log_prior", np.asarray(self.class_log_prior, dtype=float))
        object.__setattr__(
            self, "feature_log_prob", np.asarray(self.feature_log_prob, dtype=float)
        )

        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive. Actual: {self.alpha}")
        if self.feature_log_prob.ndim != 2:
            raise ValueError(
                "feature_log_prob must be 2-dimensional. Actual number of dimensions: "
                f"{self.feature_log_prob.ndim}"
            )
        if self.feature_log_prob.shape[0] != NUM_CLASSES:
            raise NaiveBayesError(
                f"A model must have exactly {NUM_CLASSES} classes. Actual: "
                f"{self.feature_log_prob.shape[0]}"
            )
        if self.class_log_prior.shape != (self.feature_log_prob.shape[0],):
            raise ValueError(
                f"Expected {self.feature_log_prob.shape[0]} class priors, got "
                f"{self.class_log_prior.shape}"
            )
        if not (
            np.all(np.isfinite(self.feature_log_prob)) and np.all(np.isfinite(self.class_log_prior))
        ):
            raise NaiveBayesError("NB parameters must be finite.")
        if np.any(np.abs(logsumexp(self.feature_log_prob, axis=1)) > NORMALIZATION_TOL):
            raise NaiveBayesError("NB normalization invariant violated")
        if abs(logsumexp(self.class_log_prior)) > NORMALIZATION_TOL:
            raise NaiveBayesError("NB prior normalization invariant violated")

    @property
    def n_classes(self) -> int:
        return self.feature_log_prob.shape[0]

    @property
    def n_features(self) -> int:
        return self.feature_log_prob.shape[1]


def nb_fit(matrix: FeatureMatrix, alpha: float = 1.0, fit_prior: bool = True) -> NbModel:
    """Fit a multinomial Naive Bayes model.

    Parameters
    ----------
    matrix : FeatureMatrix
        Non-negative training rows with labels 0 and 1.
    alpha : float
        The additive smoothing prior, > 0.
    fit_prior : bool
        Learn the class priors from the label frequencies. If False, the priors are uniform.

    Returns
    -------
    NbModel
        The fitted model.

    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive. Actual: {alpha}")
    if len(matrix) == 0:
        raise NaiveBayesError("Cannot fit Naive Bayes on an empty feature matrix.")

    labels = matrix.labels
    if not np.all((labels >= 0) & (labels < NUM_CLASSES)):
        raise NaiveBayesError("Naive Bayes labels must be 0 or 1.")

    x = matrix.csr
    if x.nnz and x.data.min() < 0:
        raise NaiveBayesError("Naive Bayes features must be non-negative.")

    class_counts = np.bincount(labels, minlength=NUM_CLASSES)
    if np.any(class_counts == 0):
        missing = [c for c in range(NUM_CLASSES) if class_counts[c] == 0]
        raise NaiveBayesError(f"No training rows for class(es) {missing}.")

    n_features = matrix.dimension
    feature_counts = np.zeros((NUM_CLASSES, n_features))
    for c in range(NUM_CLASSES):
        feature_counts[c] = np.asarray(x[labels == c].sum(axis=0)).ravel()

    smoothed = feature_counts + alpha
    totals = feature_counts.sum(axis=1) + alpha * n_features
    feature_log_prob = np.log(smoothed) - np.log(totals)[:, np.newaxis]

    if fit_prior:
        class_log_prior = np.log(class_counts) - np.log(class_counts.sum())
    else:
        class_log_prior = np.full(NUM_CLASSES, -np.log(NUM_CLASSES))

    return NbModel(
        class_log_prior=class_log_prior,
        feature_log_prob=feature_log_prob,
        alpha=alpha,
        fit_prior=fit_prior,
    )


def nb_log_posterior(model: NbModel, x: SparseVector) -> NDArray[np.float64]:
    """The unnormalized log score log P(c) + sum_i x_i log theta_ci of every class."""
    if x.dimension != model.n_features:
        raise ValueError(
            f"Dimension mismatch: the model expects {model.n_features} features, got "
            f"{x.dimension}"
        )
    return model.class_log_prior + model.feature_log_prob[:, x.indices] @ x.values


def nb_predict(model: NbModel, x: SparseVector) -> int:
    """The class with the largest log score. Exact ties go to the lower class index."""
    return int(np.argmax(nb_log_posterior(model, x)))


def nb_decision(model: NbModel, x: SparseVector) -> float:
    """Log odds of abnormal (1) against normal (0)."""
    scores = nb_log_posterior(model, x)
    return float(scores[1] - scores[0])
