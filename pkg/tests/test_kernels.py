import numpy as np
import pytest

from newsvm.errors import ValidationError
from newsvm.kernels import KernelSpec, kernel_eval, kernel_from_dots, kernel_matrix


def test_spec_validation():
    with pytest.raises(ValidationError):
        KernelSpec("rbf", gamma=1.0)
    with pytest.raises(ValidationError):
        KernelSpec("polynomial", gamma=0.0)
    with pytest.raises(ValidationError):
        KernelSpec("polynomial", gamma=1.0, degree=0)


def test_polynomial_orthogonal_vectors():
    spec = KernelSpec("polynomial", gamma=1.0, coef0=0.0, degree=3)
    assert kernel_eval(spec, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0, abs=1e-12)


def test_polynomial_hand_value():
    spec = KernelSpec("polynomial", gamma=0.5, coef0=0.0, degree=3)
    assert kernel_eval(spec, [1.0, 2.0], [3.0, 4.0]) == pytest.approx(166.375, abs=1e-12)


def test_sigmoid_zero_vectors():
    spec = KernelSpec("sigmoid", gamma=1.0, coef0=0.0)
    assert kernel_eval(spec, [0.0, 0.0], [0.0, 0.0]) == pytest.approx(0.0, abs=1e-12)


def test_dimension_mismatch():
    spec = KernelSpec("polynomial", gamma=1.0)
    with pytest.raises(ValidationError):
        kernel_eval(spec, [1.0, 2.0], [1.0])
    with pytest.raises(ValidationError):
        kernel_matrix(spec, np.ones((2, 3)), np.ones((2, 2)))


def test_matrix_agrees_with_eval():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(4, 3))
    b = rng.normal(size=(5, 3))
    for spec in (KernelSpec("polynomial", gamma=0.7, coef0=0.2, degree=3),
                 KernelSpec("sigmoid", gamma=0.3, coef0=-0.1)):
        k = kernel_matrix(spec, a, b)
        assert k.shape == (4, 5)
        for i in range(4):
            for j in range(5):
                assert k[i, j] == pytest.approx(kernel_eval(spec, a[i], b[j]), rel=1e-12)


def test_kernel_from_dots_matches_matrix():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(6, 4))
    spec = KernelSpec("sigmoid", gamma=0.05, coef0=0.0)
    assert np.allclose(kernel_from_dots(spec, a @ a.T), kernel_matrix(spec, a))
