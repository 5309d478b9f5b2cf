"""Kernel functions for the support vector machine.

The four kernel families are

- linear: x.z
- polynomial: (gamma x.z + r)^2
- rbf: exp(-gamma |x - z|^2)
- sigmoid: tanh(gamma x.z + gamma), or tanh(gamma x.z + r) when `conventional_sigmoid` is set

The polynomial degree is fixed at 2.

"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray
from scipy.sparse import csr_matrix

from leb.abnormality.vectorize import SparseVector


POLYNOMIAL_DEGREE = 2


class KernelKind(Enum):
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"
    RBF = "rbf"
    SIGMOID = "sigmoid"


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family and its parameters.

    Attributes
    ----------
    kind : KernelKind
        The kernel family.
    gamma : float
        The scale gamma. Must be positive for every kind except linear, which ignores it.
    coef : float
        The offset r of the polynomial kernel, and of the sigmoid kernel if
        `conventional_sigmoid` is True.
    conventional_sigmoid : bool
        Use tanh(gamma x.z + r) instead of tanh(gamma x.z + gamma).

    """

    kind: KernelKind = KernelKind.RBF
    gamma: float = 1.0
    coef: float = 0.0
    conventional_sigmoid: bool = False

    def __post_init__(self):
        if self.kind is not KernelKind.LINEAR and not self.gamma > 0:
            raise ValueError(
                f"gamma must be positive for the {self.kind.value} kernel. Actual: {self.gamma}"
            )

    @property
    def sigmoid_offset(self) -> float:
        return self.coef if self.conventional_sigmoid else self.gamma


def kernel_eval(spec: KernelSpec, x: SparseVector, z: SparseVector) -> float:
    """Evaluates the kernel on a pair of vectors.

    Parameters
    ----------
    spec : KernelSpec
        The kernel.
    x, z : SparseVector
        Two vectors of the same dimension.

    Returns
    -------
    float
        K(x, z). The result is exactly symmetric in its arguments, and the rbf kernel of a vector
        with itself is exactly 1.

    """
    if x.dimension != z.dimension:
        raise ValueError(f"Dimension mismatch: {x.dimension} and {z.dimension}")

    xd = x.to_dense()
    zd = z.to_dense()

    match spec.kind:
        case KernelKind.LINEAR:
            return float(xd @ zd)
        case KernelKind.POLYNOMIAL:
            return float((spec.gamma * (xd @ zd) + spec.coef) ** POLYNOMIAL_DEGREE)
        case KernelKind.RBF:
            diff = xd - zd
            return float(np.exp(-spec.gamma * (diff @ diff)))
        case KernelKind.SIGMOID:
            return float(np.tanh(spec.gamma * (xd @ zd) + spec.sigmoid_offset))


def squared_norms(a: csr_matrix) -> NDArray[np.float64]:
    """Row-wise squared Euclidean norms of a CSR matrix."""
    return np.asarray(a.multiply(a).sum(axis=1), dtype=np.float64).ravel()


def kernel_matrix(
    spec: KernelSpec,
    a: csr_matrix,
    b: csr_matrix,
    a_sq_norms: NDArray[np.float64] | None = None,
    b_sq_norms: NDArray[np.float64] | None = None,
) -> NDArray[np.float64]:
    """Evaluates the kernel between every row of `a` and every row of `b`.

    Parameters
    ----------
    spec : KernelSpec
        The kernel.
    a : csr_matrix
        An m x d matrix.
    b : csr_matrix
        An n x d matrix.
    a_sq_norms, b_sq_norms : NDArray[np.float64], optional
        Precomputed squared row norms, only used by the rbf kernel.

    Returns
    -------
    NDArray[np.float64]
        The dense m x n kernel matrix.

    """
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"Dimension mismatch: {a.shape[1]} and {b.shape[1]}")

    dots = np.asarray((a @ b.T).toarray(), dtype=np.float64)

    match spec.kind:
        case KernelKind.LINEAR:
            return dots
        case KernelKind.POLYNOMIAL:
            return (spec.gamma * dots + spec.coef) ** POLYNOMIAL_DEGREE
        case KernelKind.RBF:
            if a_sq_norms is None:
                a_sq_norms = squared_norms(a)
            if b_sq_norms is None:
                b_sq_norms = squared_norms(b)
            sq_dists = a_sq_norms[:, np.newaxis] + b_sq_norms[np.newaxis, :] - 2 * dots
            # Cancellation can leave tiny negative distances
            np.maximum(sq_dists, 0, out=sq_dists)
            return np.exp(-spec.gamma * sq_dists)
        case KernelKind.SIGMOID:
            return np.tanh(spec.gamma * dots + spec.sigmoid_offset)
