from fractions import Fraction

import numpy as np
import pytest

from ozemu.errors import ShapeMismatchError
from ozemu.oracle import (
    abs_error_vs_exact,
    exact_gemm_float,
    exact_gemm_fractions,
    exact_gemm_scaled,
    rel_error_vs_exact,
)


def test_matches_direct_fraction_product(rng):
    a = rng.random((4, 3)) - 0.5
    b = rng.random((3, 5)) - 0.5
    got = exact_gemm_fractions(a, b)
    for i in range(4):
        for j in range(5):
            want = sum(Fraction(float(a[i, t])) * Fraction(float(b[t, j])) for t in range(3))
            assert got[i][j] == want


def test_integer_matrices_are_exact_in_float(rng):
    a = rng.integers(-8, 9, size=(6, 6)).astype(float)
    b = rng.integers(-8, 9, size=(6, 6)).astype(float)
    assert np.array_equal(exact_gemm_float(a, b), a @ b)
    assert rel_error_vs_exact(a @ b, a, b).max() == 0.0


def test_wide_dynamic_range(rng):
    a = np.array([[2.0**300, 2.0**-300], [1.0, 1.0]])
    b = np.eye(2)
    ints, scale = exact_gemm_scaled(a, b)
    assert float(Fraction(ints[0][0]) * Fraction(2) ** scale) == 2.0**300

    errs = abs_error_vs_exact(a, a, b)
    assert errs.max() == 0.0


def test_zero_matrix():
    z = np.zeros((2, 2))
    ints, scale = exact_gemm_scaled(z, z)
    assert all(v == 0 for row in ints for v in row)
    assert rel_error_vs_exact(z, z, z).max() == 0.0


def test_rel_error_zero_exact_nonzero_approx():
    a = np.array([[1.0, -1.0]])
    b = np.array([[1.0], [1.0]])   # exact product is 0
    rel = rel_error_vs_exact(np.array([[1e-20]]), a, b)
    assert np.isinf(rel[0, 0])


def test_shape_validation():
    with pytest.raises(ShapeMismatchError):
        exact_gemm_scaled(np.ones((2, 3)), np.ones((2, 3)))
    with pytest.raises(ShapeMismatchError):
        abs_error_vs_exact(np.ones((3, 3)), np.ones((2, 2)), np.ones((2, 2)))
