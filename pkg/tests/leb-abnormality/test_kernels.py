import math

import numpy as np
from numpy.testing import assert_allclose
import pytest
from scipy.sparse import vstack

from leb.abnormality.kernels import KernelKind, KernelSpec, kernel_eval, kernel_matrix
from leb.abnormality.vectorize import SparseVector


NUM_PAIRS = 1000

SPECS = [
    KernelSpec(KernelKind.LINEAR),
    KernelSpec(KernelKind.POLYNOMIAL, gamma=0.5, coef=1.0),
    KernelSpec(KernelKind.RBF, gamma=0.7),
    KernelSpec(KernelKind.SIGMOID, gamma=0.1),
    KernelSpec(KernelKind.SIGMOID, gamma=0.1, coef=-0.5, conventional_sigmoid=True),
]


def random_sparse(rng, dimension: int = 8) -> SparseVector:
    dense = rng.normal(size=dimension)
    dense[rng.random(dimension) < 0.5] = 0.0
    return SparseVector.from_dense(dense)


def test_linear():
    x = SparseVector.from_dense([1.0, 2.0])
    z = SparseVector.from_dense([3.0, 4.0])

    assert kernel_eval(KernelSpec(KernelKind.LINEAR), x, z) == 11.0


def test_rbf_examples():
    x = SparseVector.from_dense([0.0, 0.0])
    z = SparseVector.from_dense([1.0, 1.0])

    assert kernel_eval(KernelSpec(KernelKind.RBF, gamma=0.5), x, z) == pytest.approx(
        0.367879, abs=1e-6
    )
    assert kernel_eval(KernelSpec(KernelKind.RBF, gamma=0.5), z, z) == 1.0


def test_polynomial_and_sigmoid():
    x = SparseVector.from_dense([1.0, 2.0])
    z = SparseVector.from_dense([3.0, 4.0])

    poly = KernelSpec(KernelKind.POLYNOMIAL, gamma=0.5, coef=1.0)
    sigmoid = KernelSpec(KernelKind.SIGMOID, gamma=0.1)
    conventional = KernelSpec(KernelKind.SIGMOID, gamma=0.1, coef=-0.5, conventional_sigmoid=True)

    assert kernel_eval(poly, x, z) == pytest.approx(6.5**2)
    assert kernel_eval(sigmoid, x, z) == pytest.approx(math.tanh(1.1 + 0.1))
    assert kernel_eval(conventional, x, z) == pytest.approx(math.tanh(1.1 - 0.5))


def test_rbf_self_similarity_is_exactly_one():
    rng = np.random.default_rng(0)
    spec = KernelSpec(KernelKind.RBF, gamma=3.0)

    for _ in range(100):
        x = random_sparse(rng)
        assert kernel_eval(spec, x, x) == 1.0


@pytest.mark.parametrize("spec", SPECS)
def test_symmetry(spec):
    rng = np.random.default_rng(1)

    for _ in range(NUM_PAIRS):
        x, z = random_sparse(rng), random_sparse(rng)
        assert abs(kernel_eval(spec, x, z) - kernel_eval(spec, z, x)) <= 1e-12


def test_linear_kernel_on_integer_vectors_is_exact():
    rng = np.random.default_rng(2)
    spec = KernelSpec(KernelKind.LINEAR)

    for _ in range(NUM_PAIRS):
        a = rng.integers(-5, 6, size=10)
        b = rng.integers(-5, 6, size=10)
        expected = sum(int(p) * int(q) for p, q in zip(a, b))
        x = SparseVector.from_dense(a.astype(float))
        z = SparseVector.from_dense(b.astype(float))
        assert kernel_eval(spec, x, z) == expected


@pytest.mark.parametrize("spec", SPECS)
def test_kernel_matrix_matches_pairwise(spec):
    rng = np.random.default_rng(3)
    xs = [random_sparse(rng) for _ in range(6)]
    zs = [random_sparse(rng) for _ in range(4)]
    a = vstack([x.to_csr() for x in xs], format="csr")
    b = vstack([z.to_csr() for z in zs], format="csr")

    k = kernel_matrix(spec, a, b)

    expected = np.array([[kernel_eval(spec, x, z) for z in zs] for x in xs])
    assert_allclose(k, expected, rtol=1e-10, atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec(), SparseVector.zeros(2), SparseVector.zeros(3))


@pytest.mark.parametrize("kind", [KernelKind.POLYNOMIAL, KernelKind.RBF, KernelKind.SIGMOID])
def test_gamma_must_be_positive(kind):
    with pytest.raises(ValueError):
        KernelSpec(kind, gamma=0.0)
