"""Dense symmetric linear algebra for small problems (n up to ~50).

Eigendecomposition is done with cyclic Jacobi rotations; PSD tests and
minimum-norm solves are built on top of it. Every tolerance is scaled by
``max(1, max_norm(...))``.
"""
import logging
import math
from typing import NamedTuple

import numpy as np

from qp_errors import InvalidInputError, NumericalFailure

DEFAULT_PSD_TOL = 1e-8
MAX_SWEEPS = 100


class MinNormSolution(NamedTuple):
    solution: np.ndarray
    consistent: bool
    nullity: int
    kernel: np.ndarray  # columns span the numerical kernel
    residual: float


def max_norm(A) -> float:
    """Entrywise max-norm; 0.0 for empty input."""
    arr = np.asarray(A, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def scale_of(*arrays) -> float:
    return max([1.0] + [max_norm(a) for a in arrays])


def as_vector(x, n: int = None) -> np.ndarray:
    vec = np.array(x, dtype=float).reshape(-1)
    if n is not None and vec.shape[0] != n:
        raise InvalidInputError(f"expected a vector of length {n}, got {vec.shape[0]}",
                                code="dimension_mismatch")
    return vec


def as_matrix(A, rows: int = None, cols: int = None) -> np.ndarray:
    mat = np.array(A, dtype=float)
    if mat.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got an array with {mat.ndim} dimensions",
                                code="dimension_mismatch")
    if (rows is not None and mat.shape[0] != rows) or (cols is not None and mat.shape[1] != cols):
        raise InvalidInputError(f"expected a {rows}x{cols} matrix, got {mat.shape[0]}x{mat.shape[1]}",
                                code="dimension_mismatch")
    return mat


def as_sym_matrix(A, n: int = None) -> np.ndarray:
    """Square matrix made exactly symmetric as (A + A^T)/2."""
    mat = as_matrix(A, n, n)
    if mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
        raise InvalidInputError(f"expected a square matrix, got {mat.shape[0]}x{mat.shape[1]}",
                                code="dimension_mismatch")
    return 0.5 * (mat + mat.T)


def _off_diagonal_norm(a: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part, summed entrywise."""
    return float(np.linalg.norm(a - np.diag(a.diagonal())))


def eig_sym(A, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues ascending, V) with orthonormal eigenvector columns,
    so that A = V diag(eigenvalues) V^T.

    Raises:
        NumericalFailure: off-diagonal mass did not vanish within max_sweeps.
    """
    a = as_sym_matrix(A)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v

    frob = max(1.0, float(np.linalg.norm(a)))
    target = 1e-13 * frob
    negligible = 1e-17 * frob
    for sweep in range(max_sweeps):
        off = _off_diagonal_norm(a)
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= negligible:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        off = _off_diagonal_norm(a)
        if off > target:
            raise NumericalFailure(
                f"Jacobi eigensolver did not converge after {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e})")

    eigenvalues = a.diagonal().copy()
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def min_eigenvalue(A) -> float:
    return float(eig_sym(A)[0][0])


def is_psd(A, tol: float = DEFAULT_PSD_TOL) -> bool:
    """True iff lambda_min(A) >= -tol * max(1, ||A||_max)."""
    if tol < 0:
        raise InvalidInputError(f"tolerance must be nonnegative, got {tol}")
    mat = as_sym_matrix(A)
    return min_eigenvalue(mat) >= -tol * scale_of(mat)


def solve_min_norm(A, b, tol: float = DEFAULT_PSD_TOL) -> MinNormSolution:
    """Minimum-norm solution of A x = b for symmetric A.

    Eigenvalues with |lambda| <= tol * max(1, ||A||_max) are treated as zero;
    the system is consistent when the residual of the resulting least-squares
    solution is at most tol * max(1, ||b||).
    """
    mat = as_sym_matrix(A)
    rhs = as_vector(b, mat.shape[0])
    eigenvalues, vectors = eig_sym(mat)

    cutoff = tol * scale_of(mat)
    active = np.abs(eigenvalues) > cutoff
    basis = vectors[:, active]
    x = basis @ ((basis.T @ rhs) / eigenvalues[active])
    residual = float(np.linalg.norm(mat @ x - rhs))
    consistent = residual <= tol * max(1.0, float(np.linalg.norm(rhs)))
    nullity = int(np.count_nonzero(~active))
    if not consistent:
        logging.debug(f"min-norm solve inconsistent: residual {residual:.3e}, nullity {nullity}")
    return MinNormSolution(x, consistent, nullity, vectors[:, ~active], residual)
