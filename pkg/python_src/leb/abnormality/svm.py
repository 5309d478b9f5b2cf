"""Binary kernel support vector machine trained by sequential minimal optimization.

Training minimizes the dual objective

    1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j) - sum_j a_j

subject to sum_i a_i y_i = 0 and 0 <= a_i <= C. Each iteration picks the maximal violating index
i and, among the indexes that can move against it, the index j with the largest second order
decrease of the objective. The pair is then optimized analytically and clipped to the box, so the
iterates stay feasible. Training stops when the largest KKT violation drops below the tolerance.

Labels 0 and 1 are mapped to y = -1 and y = +1, so a positive decision value means abnormal.

"""
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property
import logging
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.sparse import csr_matrix, vstack

from leb.abnormality.kernels import KernelKind, KernelSpec, kernel_matrix, squared_norms
from leb.abnormality.vectorize import FeatureMatrix, SparseVector


logger = logging.getLogger(__name__)


TAU = 1e-12
"""Replaces non-positive curvature along a working-set direction."""


class SvmError(Exception):
    pass


class SvmConvergenceError(SvmError):
    """Raised when the pass budget runs out before the KKT conditions hold.

    Attributes
    ----------
    model : SvmModel
        The model built from the last (best) iterate.
    report : SolverReport
        The state of the solver at the time it gave up.

    """

    def __init__(self, message: str, model: "SvmModel", report: "SolverReport"):
        super().__init__(message)
        self.model = model
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    """Settings of the SMO solver.

    Attributes
    ----------
    tolerance : float
        KKT tolerance of the stopping criterion.
    max_passes : int
        Iteration budget in passes; one pass is as many pair updates as there are training points.
    seed : int
        Seed of the permutation that breaks ties during working-set selection.
    cache_rows : int
        The maximum number of kernel rows kept in memory. 0 disables caching.

    """

    tolerance: float = 1e-3
    max_passes: int = 1000
    seed: int = 0
    cache_rows: int = 4096

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"The tolerance must be positive. Actual: {self.tolerance}")
        if self.max_passes < 1:
            raise ValueError(f"max_passes must be at least 1. Actual: {self.max_passes}")
        if self.cache_rows < 0:
            raise ValueError(f"cache_rows must be non-negative. Actual: {self.cache_rows}")


@dataclass(eq=False)
class SolverReport:
    """Diagnostics of an SMO run."""

    alpha: NDArray[np.float64]
    objective_history: list[float]
    violation: float
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class SvmModel:
    """A trained binary SVM.

    Attributes
    ----------
    support_vectors : tuple[SparseVector, ...]
        The training points with a nonzero dual variable.
    dual_coef : NDArray[np.float64]
        y_i * a_i for each support vector.
    bias : float
        The offset of the decision function.
    kernel : KernelSpec
        The kernel used for training.
    c : float
        The box constraint C.
    dimension : int
        The dimension of the input vectors.
    report : SolverReport, optional
        Solver diagnostics. Only present on freshly trained models.

    """

    support_vectors: tuple[SparseVector, ...]
    dual_coef: NDArray[np.float64]
    bias: float
    kernel: KernelSpec
    c: float
    dimension: int
    report: Optional[SolverReport] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "support_vectors", tuple(self.support_vectors))
        object.__setattr__(self, "dual_coef", np.asarray(self.dual_coef, dtype=np.float64))
        object.__setattr__(self, "bias", float(self.bias))

        if not self.c > 0:
            raise ValueError(f"C must be positive. Actual: {self.c}")
        if not self.support_vectors:
            raise SvmError("An SVM model needs at least one support vector.")
        if self.dual_coef.shape != (len(self.support_vectors),):
            raise ValueError(
                f"Expected {len(self.support_vectors)} dual coefficients, got "
                f"{self.dual_coef.shape}"
            )
        for sv in self.support_vectors:
            if sv.dimension != self.dimension:
                raise ValueError(
                    f"Support vectors must have dimension {self.dimension}, got {sv.dimension}"
                )
        if not (np.all(np.isfinite(self.dual_coef)) and np.isfinite(self.bias)):
            raise SvmError("SVM dual coefficients and bias must be finite.")
        magnitudes = np.abs(self.dual_coef)
        if np.any(magnitudes == 0) or np.any(magnitudes > self.c):
            raise SvmError("SVM dual variables must satisfy 0 < a_i <= C.")
        if abs(float(np.sum(self.dual_coef))) > 1e-8:
            raise SvmError("SVM balance invariant violated: sum of y_i a_i is not 0.")

    @cached_property
    def sv_csr(self) -> csr_matrix:
        return vstack([sv.to_csr() for sv in self.support_vectors], format="csr")

    @cached_property
    def sv_sq_norms(self) -> NDArray[np.float64]:
        return squared_norms(self.sv_csr)


class KernelRowCache:
    """Least recently used cache of rows of the training kernel matrix."""

    def __init__(self, spec: KernelSpec, x: csr_matrix, capacity: int):
        self._spec = spec
        self._x = x
        self._sq_norms = squared_norms(x)
        self._capacity = capacity
        self._rows: OrderedDict[int, NDArray[np.float64]] = OrderedDict()
        self.hits = 0
        self.misses = 0

    def __len__(self):
        return len(self._rows)

    def row(self, i: int) -> NDArray[np.float64]:
        if i in self._rows:
            self.hits += 1
            self._rows.move_to_end(i)
            return self._rows[i]

        self.misses += 1
        row = kernel_matrix(
            self._spec, self._x, self._x[i], self._sq_norms, self._sq_norms[i : i + 1]
        )[:, 0]
        if self._capacity > 0:
            self._rows[i] = row
            if len(self._rows) > self._capacity:
                self._rows.popitem(last=False)
        return row

    def diagonal(self) -> NDArray[np.float64]:
        """K(x_i, x_i) for every training point, computed from the squared norms."""
        sq = self._sq_norms
        spec = self._spec
        match spec.kind:
            case KernelKind.LINEAR:
                return sq.copy()
            case KernelKind.POLYNOMIAL:
                return (spec.gamma * sq + spec.coef) ** 2
            case KernelKind.RBF:
                return np.ones_like(sq)
            case KernelKind.SIGMOID:
                return np.tanh(spec.gamma * sq + spec.sigmoid_offset)


def dual_objective(alpha: NDArray[np.float64], gradient: NDArray[np.float64]) -> float:
    """The dual objective, given the gradient Q a - 1 at a."""
    return float(0.5 * alpha @ (gradient - 1.0))


def _bias(alpha, y, gradient, c) -> float:
    """Average y_i G_i over free points, or the midpoint of the feasible interval."""
    y_grad = y * gradient
    at_upper = alpha >= c
    at_lower = alpha <= 0
    free = ~(at_upper | at_lower)

    if np.any(free):
        rho = float(np.mean(y_grad[free]))
    else:
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = float(np.min(y_grad[ub_mask])) if np.any(ub_mask) else np.inf
        lb = float(np.max(y_grad[lb_mask])) if np.any(lb_mask) else -np.inf
        rho = (ub + lb) / 2

    return -rho


def _build_model(
    matrix: FeatureMatrix,
    alpha: NDArray[np.float64],
    y: NDArray[np.float64],
    bias: float,
    c: float,
    spec: KernelSpec,
    report: SolverReport,
) -> "SvmModel":
    sv_idxs = np.flatnonzero(alpha > 0)
    return SvmModel(
        support_vectors=tuple(matrix.rows[i] for i in sv_idxs),
        dual_coef=y[sv_idxs] * alpha[sv_idxs],
        bias=bias,
        kernel=spec,
        c=c,
        dimension=matrix.dimension,
        report=report,
    )


def svm_fit(
    matrix: FeatureMatrix,
    c: float = 1.0,
    spec: KernelSpec = KernelSpec(),
    cfg: SolverConfig = SolverConfig(),
) -> SvmModel:
    """Train a binary SVM on a feature matrix.

    Parameters
    ----------
    matrix : FeatureMatrix
        Training rows with labels 0 (normal) and 1 (abnormal).
    c : float
        The box constraint C.
    spec : KernelSpec
        The kernel.
    cfg : SolverConfig
        Solver settings.

    Returns
    -------
    SvmModel
        The trained model. Its `report` attribute holds the full dual vector and the objective
        value after every pass.

    Raises
    ------
    SvmError
        If the training data contains a single class.
    SvmConvergenceError
        If the KKT conditions are not met within `cfg.max_passes` passes.

    """
    if not c > 0:
        raise ValueError(f"C must be positive. Actual: {c}")

    labels = matrix.labels
    if not np.all((labels == 0) | (labels == 1)):
        raise SvmError("SVM labels must be 0 or 1.")
    if len(np.unique(labels)) != 2:
        raise SvmError("single-class training data: the SVM needs both classes")

    n = len(matrix)
    # The solver works on a seeded permutation of the rows, so argmax ties go to whichever point
    # comes first in it
    order = np.random.Generator(np.random.PCG64(cfg.seed)).permutation(n)
    y = np.where(labels[order] == 1, 1.0, -1.0)
    cache = KernelRowCache(spec, matrix.csr[order], cfg.cache_rows)
    k_diag = cache.diagonal()

    alpha = np.zeros(n)
    # -y_i G_i with G = Q a - 1 the gradient of the dual objective
    minus_y_grad = y.copy()
    up = y > 0
    low = y < 0
    objective_history = [dual_objective(alpha, -y * minus_y_grad)]
    max_iterations = cfg.max_passes * n

    violation = np.inf
    iteration = 0
    converged = False
    while True:
        masked = np.where(up, minus_y_grad, -np.inf)
        i = int(np.argmax(masked))
        g_max = float(masked[i])
        g_min = float(np.min(np.where(low, minus_y_grad, np.inf)))
        if g_max == -np.inf or g_min == np.inf:
            violation = 0.0
            converged = True
            break
        violation = g_max - g_min
        if violation < cfg.tolerance:
            converged = True
            break
        if iteration >= max_iterations:
            break

        k_i = cache.row(i)
        grad_diff = g_max - minus_y_grad
        curvature = k_diag[i] + k_diag - 2 * k_i
        curvature[curvature <= 0] = TAU
        decrease = np.where(low & (grad_diff > 0), grad_diff * grad_diff / curvature, -np.inf)
        j = int(np.argmax(decrease))
        if decrease[j] == -np.inf:
            converged = True
            break
        k_j = cache.row(j)

        old_ai, old_aj = alpha[i], alpha[j]
        grad_i = -y[i] * minus_y_grad[i]
        grad_j = -y[j] * minus_y_grad[j]
        quad = k_diag[i] + k_diag[j] - 2 * k_i[j]
        if quad <= 0:
            quad = TAU

        if y[i] != y[j]:
            delta = (-grad_i - grad_j) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = c - diff
            elif alpha[j] > c:
                alpha[j] = c
                alpha[i] = c + diff
        else:
            delta = (grad_i - grad_j) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > c:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = total - c
            elif alpha[j] < 0:
                alpha[j] = 0
                alpha[i] = total
            if total > c:
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = total - c
            elif alpha[i] < 0:
                alpha[i] = 0
                alpha[j] = total

        # Q_i = y * y_i * K_i and y * y = 1
        minus_y_grad -= y[i] * (alpha[i] - old_ai) * k_i + y[j] * (alpha[j] - old_aj) * k_j
        for t in (i, j):
            if y[t] > 0:
                up[t], low[t] = alpha[t] < c, alpha[t] > 0
            else:
                up[t], low[t] = alpha[t] > 0, alpha[t] < c
        iteration += 1

        if iteration % n == 0:
            objective = dual_objective(alpha, -y * minus_y_grad)
            if objective > objective_history[-1] + 1e-9 * max(1.0, abs(objective_history[-1])):
                logger.warning(
                    "Dual objective increased from %g to %g in pass %d.",
                    objective_history[-1],
                    objective,
                    iteration // n,
                )
            objective_history.append(objective)
            logger.debug(
                "Pass %d: objective %.10g, max KKT violation %.3g.",
                iteration // n,
                objective,
                violation,
            )

    objective_history.append(dual_objective(alpha, -y * minus_y_grad))

    # Back to row order
    row_alpha = np.empty(n)
    row_alpha[order] = alpha
    row_gradient = np.empty(n)
    row_gradient[order] = -y * minus_y_grad
    row_y = np.where(labels == 1, 1.0, -1.0)

    report = SolverReport(
        alpha=row_alpha,
        objective_history=objective_history,
        violation=violation,
        iterations=iteration,
        converged=converged,
    )
    bias = _bias(row_alpha, row_y, row_gradient, c)
    model = _build_model(matrix, row_alpha, row_y, bias, c, spec, report)

    if not converged:
        raise SvmConvergenceError(
            f"SMO did not converge within {cfg.max_passes} passes: max KKT violation "
            f"{violation:.3g} > tolerance {cfg.tolerance:g}",
            model,
            report,
        )

    logger.info(
        "SMO converged after %d iterations with %d support vectors (cache hits %d, misses %d).",
        iteration,
        len(model.support_vectors),
        cache.hits,
        cache.misses,
    )

    return model


def _check_dimension(model: SvmModel, dimension: int) -> None:
    if dimension != model.dimension:
        raise ValueError(
            f"Dimension mismatch: the model expects {model.dimension} features, got {dimension}"
        )


def svm_decision(model: SvmModel, x: SparseVector) -> float:
    """sum_i y_i a_i K(x, x_i) + bias, the value whose sign is the prediction."""
    _check_dimension(model, x.dimension)
    k = kernel_matrix(model.kernel, model.sv_csr, x.to_csr(), model.sv_sq_norms)[:, 0]
    return float(k @ model.dual_coef + model.bias)


def svm_decision_batch(model: SvmModel, matrix: FeatureMatrix) -> NDArray[np.float64]:
    """Decision values for every row of a feature matrix."""
    _check_dimension(model, matrix.dimension)
    if len(matrix) == 0:
        return np.array([], dtype=np.float64)
    k = kernel_matrix(model.kernel, matrix.csr, model.sv_csr, b_sq_norms=model.sv_sq_norms)
    return k @ model.dual_coef + model.bias


def svm_predict(model: SvmModel, x: SparseVector) -> int:
    """1 (abnormal) if the decision value is positive, else 0. A zero decision value gives 0."""
    return int(svm_decision(model, x) > 0)


def kkt_residuals(
    model: SvmModel, matrix: FeatureMatrix, alpha: NDArray[np.float64]
) -> NDArray[np.float64]:
    """How far each training point is from satisfying its KKT condition.

    With margin m_i = y_i f(x_i): a_i = 0 requires m_i >= 1, 0 < a_i < C requires m_i = 1 and
    a_i = C requires m_i <= 1. The residual is the size of the violation, 0 if satisfied.

    """
    y = np.where(matrix.labels == 1, 1.0, -1.0)
    margins = y * svm_decision_batch(model, matrix)
    residuals = np.where(
        alpha <= 0,
        np.maximum(0.0, 1 - margins),
        np.where(alpha >= model.c, np.maximum(0.0, margins - 1), np.abs(margins - 1)),
    )
    return residuals
