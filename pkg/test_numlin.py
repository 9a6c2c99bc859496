import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from numlin import as_sym_matrix, eig_sym, is_psd, max_norm, min_eigenvalue, solve_min_norm
from qp_errors import InvalidInputError, NumericalFailure


def test_identity_spectrum():
    eigenvalues, vectors = eig_sym(np.eye(2))
    assert_allclose(eigenvalues, [1.0, 1.0])
    assert_allclose(vectors.T @ vectors, np.eye(2), atol=1e-14)


def test_swap_matrix_spectrum():
    eigenvalues, _ = eig_sym([[0.0, 1.0], [1.0, 0.0]])
    assert_allclose(eigenvalues, [-1.0, 1.0], atol=1e-14)


def test_indefinite_example_spectrum():
    eigenvalues, _ = eig_sym([[-1.0, -2.0], [-2.0, 1.0]])
    assert_allclose(eigenvalues, [-math.sqrt(5.0), math.sqrt(5.0)], atol=1e-12)


def test_one_by_one():
    eigenvalues, vectors = eig_sym([[3.5]])
    assert eigenvalues.tolist() == [3.5]
    assert vectors.tolist() == [[1.0]]


@pytest.mark.parametrize("n", range(1, 11))
def test_reconstruction_and_orthogonality(n):
    rng = np.random.default_rng(n)
    A = rng.uniform(-1.0, 1.0, size=(n, n))
    A = A + A.T
    eigenvalues, V = eig_sym(A)
    assert np.all(np.diff(eigenvalues) >= 0)
    assert max_norm(V @ np.diag(eigenvalues) @ V.T - A) <= 1e-9 * max(1.0, max_norm(A))
    assert max_norm(V.T @ V - np.eye(n)) <= 1e-10


@pytest.mark.parametrize("block", range(8))
def test_random_symmetric_matrices_converge(block):
    rng = np.random.default_rng(9000 + block)
    for _ in range(250):
        n = int(rng.integers(2, 11))
        A = rng.standard_normal((n, n))
        A = A + A.T
        eigenvalues, V = eig_sym(A)
        scale = max(1.0, max_norm(A))
        assert_allclose(V @ np.diag(eigenvalues) @ V.T, A, atol=1e-9 * scale)
        assert_allclose(V.T @ V, np.eye(n), atol=1e-10)


def test_converged_matrix_with_tiny_off_diagonal_is_accepted():
    A = np.diag([1.0, -2.0, 3.0])
    A[0, 2] = A[2, 0] = 1e-60
    eigenvalues, _ = eig_sym(A, max_sweeps=1)
    assert_allclose(eigenvalues, [-2.0, 1.0, 3.0])


def test_sweep_cap_raises():
    with pytest.raises(NumericalFailure):
        eig_sym([[0.0, 1.0], [1.0, 0.0]], max_sweeps=0)


def test_is_psd_cases():
    assert is_psd(np.zeros((3, 3)))
    assert not is_psd([[1.0, 2.0], [2.0, 1.0]])
    assert not is_psd(np.full((3, 3), 1.0 / 3.0) - np.eye(3))
    assert is_psd([[1.0, 1.0], [1.0, 1.0]])


def test_is_psd_rejects_negative_tolerance():
    with pytest.raises(InvalidInputError):
        is_psd(np.eye(2), tol=-1.0)


def test_min_eigenvalue_of_concave_family():
    Q = np.full((5, 5), 0.2) - np.eye(5)
    assert min_eigenvalue(Q) == pytest.approx(-1.0, abs=1e-12)


def test_min_norm_regular_system():
    result = solve_min_norm(np.eye(2), [1.0, 2.0])
    assert result.consistent
    assert result.nullity == 0
    assert_allclose(result.solution, [1.0, 2.0])


def test_min_norm_zero_system():
    result = solve_min_norm(np.zeros((2, 2)), [0.0, 0.0])
    assert result.consistent
    assert result.nullity == 2
    assert result.solution.tolist() == [0.0, 0.0]
    assert result.kernel.shape == (2, 2)


def test_min_norm_inconsistent():
    result = solve_min_norm([[0.0]], [1.0])
    assert not result.consistent
    assert result.nullity == 1


def test_min_norm_singular_consistent():
    A = [[1.0, 1.0], [1.0, 1.0]]
    result = solve_min_norm(A, [2.0, 2.0])
    assert result.consistent
    assert result.nullity == 1
    assert_allclose(result.solution, [1.0, 1.0], atol=1e-12)


def test_max_norm_of_empty_is_zero():
    assert max_norm(np.zeros((0, 0))) == 0.0


def test_as_sym_matrix_rejects_rectangular():
    with pytest.raises(InvalidInputError) as err:
        as_sym_matrix(np.zeros((2, 3)))
    assert err.value.code == "dimension_mismatch"
