"""Dense complex linear algebra for small Hermitian operator problems.

Operators are plain square ``complex128`` numpy arrays and states are 1-D
``complex128`` arrays.  Every space in scope is a few dozen dimensions at
most, so all decompositions go straight through LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TOL",
    "Tolerances",
    "DimensionMismatchError",
    "NotHermitianError",
    "SingularMatrixError",
    "as_operator",
    "as_state",
    "dagger",
    "exp_i",
    "hermitian_defect",
    "hermitian_eig",
    "hermitian_part",
    "is_hermitian",
    "is_psd",
    "is_unitary",
    "operator_norm",
    "polar_unitary",
    "tensor",
]


@dataclass(frozen=True)
class Tolerances:
    """Package-wide numerical tolerances; tests assert against these defaults."""

    hermitian: float = 1e-10
    unitary: float = 1e-10
    psd: float = 1e-10
    projector: float = 1e-10
    eig_residual: float = 1e-9
    singular: float = 1e-10
    unit_vector: float = 1e-12
    state_norm: float = 1e-12
    completeness: float = 1e-10
    ray_orthogonality: float = 1e-9


TOL = Tolerances()


class DimensionMismatchError(ValueError):
    """Operator or state shapes are incompatible."""


class NotHermitianError(ValueError):
    """A Hermitian matrix was required and the symmetry defect is too large."""


class SingularMatrixError(ValueError):
    """Matrix is singular (or nearly so) where an invertible one is required."""


def as_operator(matrix) -> np.ndarray:
    """Coerce to a square complex matrix."""
    op = np.asarray(matrix, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {op.shape}")
    return op


def as_state(vector, dim: int | None = None) -> np.ndarray:
    """Coerce to a 1-D complex state vector, optionally of a fixed dimension."""
    vec = np.asarray(vector, dtype=complex)
    if vec.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D state vector, got shape {vec.shape}")
    if dim is not None and vec.shape[0] != dim:
        raise DimensionMismatchError(f"expected a state of dimension {dim}, got {vec.shape[0]}")
    return vec


def dagger(matrix) -> np.ndarray:
    return np.asarray(matrix).conj().T


def hermitian_part(matrix) -> np.ndarray:
    op = as_operator(matrix)
    return (op + dagger(op)) / 2.0


def hermitian_defect(matrix) -> float:
    """Largest entrywise deviation from M = M†."""
    op = as_operator(matrix)
    if op.size == 0:
        return 0.0
    return float(np.abs(op - dagger(op)).max())


def is_hermitian(matrix, tol: float = TOL.hermitian) -> bool:
    return hermitian_defect(matrix) <= tol


def is_unitary(matrix, tol: float = TOL.unitary) -> bool:
    op = as_operator(matrix)
    return float(np.abs(dagger(op) @ op - np.eye(op.shape[0])).max()) <= tol


def is_psd(matrix, tol: float = TOL.psd) -> bool:
    if not is_hermitian(matrix, tol):
        return False
    op = as_operator(matrix)
    if op.size == 0:
        return True
    return float(np.linalg.eigvalsh(hermitian_part(op)).min()) >= -tol


def _checked_hermitian(matrix, tol: float) -> np.ndarray:
    op = as_operator(matrix)
    defect = hermitian_defect(op)
    if defect > tol:
        raise NotHermitianError(f"symmetry defect {defect:.3e} exceeds tolerance {tol:.1e}")
    return op


def hermitian_eig(matrix, tol: float = TOL.hermitian) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns the eigenvalues in ascending order together with the matrix whose
    columns are the matching orthonormal eigenvectors.
    """
    op = _checked_hermitian(matrix, tol)
    eigenvalues, eigenvectors = np.linalg.eigh(op)
    return eigenvalues, eigenvectors


def operator_norm(matrix, tol: float = TOL.hermitian) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    op = _checked_hermitian(matrix, tol)
    if op.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvalsh(op)).max())


def exp_i(generator, tol: float = TOL.hermitian) -> np.ndarray:
    """exp(iH) for Hermitian H, via eigendecomposition.  The result is unitary."""
    eigenvalues, eigenvectors = hermitian_eig(generator, tol)
    return (eigenvectors * np.exp(1j * eigenvalues)) @ dagger(eigenvectors)


def tensor(a, b) -> np.ndarray:
    """Kronecker product, row-major with the first factor as the major index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def polar_unitary(matrix, tol: float = TOL.singular) -> np.ndarray:
    """Unitary polar factor M (M†M)^(-1/2) of an invertible matrix, via SVD."""
    op = as_operator(matrix)
    left, singulars, right = np.linalg.svd(op)
    if op.size and float(singulars.min()) <= tol:
        raise SingularMatrixError(
            f"smallest singular value {singulars.min():.3e} is at or below {tol:.1e}"
        )
    return left @ right
