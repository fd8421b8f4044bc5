"""
Complex linear algebra primitives used by every bounding rule.

Matrices are plain numpy arrays (complex128 or float64); they are small
(at most N+1 rows), Hermitian and positive semidefinite.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import ContractViolation, ConvergenceError, DimensionError

logger = logging.getLogger('beamforming')

HERMITIAN_ATOL = 1e-12
EIG_TOL = 1e-12
EIG_MAX_ITER = 10_000
# Relative slack added on top of a verified eigenvalue estimate.
CEILING_REL_MARGIN = 1e-10


def as_vector(h: ArrayLike) -> NDArray:
    vector = np.asarray(h)
    if vector.ndim != 1:
        raise DimensionError(f"Expected a vector, got shape {vector.shape}")
    return vector


def as_square(S: ArrayLike) -> NDArray:
    matrix = np.asarray(S)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"Expected a square matrix, got shape {matrix.shape}")
    return matrix


def is_hermitian(S: ArrayLike, atol: float = HERMITIAN_ATOL) -> bool:
    matrix = as_square(S)
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    return bool(np.all(np.abs(matrix - matrix.conj().T) <= atol * scale))


def outer_hermitian(h: ArrayLike) -> NDArray[np.complex128]:
    """Return h hᴴ, a rank-one Hermitian PSD matrix."""
    vector = as_vector(h).astype(np.complex128)
    if vector.size == 0:
        raise DimensionError("outer_hermitian needs a nonempty vector")
    return np.outer(vector, vector.conj())


def real_part_matrix(S: ArrayLike) -> NDArray[np.float64]:
    """Entrywise real part; a Hermitian input yields a real symmetric matrix."""
    return np.real(np.asarray(S)).astype(np.float64)


def quadratic_form(w: ArrayLike, S: ArrayLike) -> float:
    """Return wᴴSw as a real number."""
    vector = as_vector(w)
    matrix = as_square(S)
    if matrix.shape[0] != vector.size:
        raise DimensionError(
            f"Vector of length {vector.size} does not match a {matrix.shape[0]}x{matrix.shape[0]} matrix"
        )
    return float(np.real(np.vdot(vector, matrix @ vector)))


def _dominates(S: NDArray, value: float) -> bool:
    """True when value·I − S is positive definite (Cholesky succeeds)."""
    n = S.shape[0]
    try:
        np.linalg.cholesky(value * np.eye(n) - S)
    except np.linalg.LinAlgError:
        return False
    return True


def _verification_level(S: NDArray, estimate: float) -> float:
    scale = float(np.max(np.abs(S)))
    return estimate + CEILING_REL_MARGIN * abs(estimate) + 1e-13 * scale * S.shape[0]


def _power_iterate(S: NDArray, start: NDArray, tol: float, max_iter: int) -> float:
    x = start / np.linalg.norm(start)
    estimate = float(np.real(np.vdot(x, S @ x)))
    for _ in range(max_iter):
        y = S @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        refined = float(np.real(np.vdot(x, S @ x)))
        if abs(refined - estimate) <= tol * max(abs(refined), np.finfo(float).tiny):
            return refined
        estimate = refined
    raise ConvergenceError(
        f"Power iteration did not converge in {max_iter} iterations",
        best_estimate=estimate,
    )


def max_eigenvalue(S: ArrayLike, tol: float = EIG_TOL, max_iter: int = EIG_MAX_ITER) -> float:
    """
    Principal eigenvalue of a Hermitian PSD matrix by power iteration.

    The start vector is the normalized all-ones vector. The returned value is
    checked with a Cholesky test; if the start vector was (numerically)
    orthogonal to the principal eigenvector the check fails and the dense
    symmetric solver is used instead.
    """
    matrix = as_square(S)
    if matrix.shape[0] == 0:
        raise DimensionError("max_eigenvalue needs a nonempty matrix")
    if not is_hermitian(matrix):
        raise ContractViolation("max_eigenvalue requires a Hermitian matrix")
    if not np.any(matrix):
        return 0.0

    n = matrix.shape[0]
    start = np.ones(n, dtype=matrix.dtype)
    if not np.any(matrix @ start):
        # all-ones lies in the null space; start from the heaviest diagonal entry
        start = np.zeros(n, dtype=matrix.dtype)
        start[int(np.argmax(np.real(np.diag(matrix))))] = 1.0

    estimate = _power_iterate(matrix, start, tol, max_iter)
    if _dominates(matrix, _verification_level(matrix, estimate)):
        return estimate

    logger.debug("Power iteration missed the principal eigenvector; using dense solver")
    return float(np.linalg.eigvalsh(matrix)[-1])


def eigenvalue_ceiling(S: ArrayLike, tol: float = EIG_TOL) -> float:
    """Certified upper bound on λ_max(S), used inside the branch-and-bound bounds."""
    matrix = as_square(S)
    if matrix.shape[0] == 0 or not np.any(matrix):
        return 0.0
    try:
        estimate = max_eigenvalue(matrix, tol)
    except ConvergenceError as exc:
        logger.warning(f"Eigenvalue estimate stalled ({exc}); using dense solver")
        estimate = float(np.linalg.eigvalsh(as_square(S))[-1])
    ceiling = _verification_level(matrix, estimate)
    if not _dominates(matrix, ceiling):
        ceiling = _verification_level(matrix, float(np.linalg.eigvalsh(matrix)[-1]))
    return ceiling
