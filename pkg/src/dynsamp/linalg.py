"""Dense complex linear algebra used throughout the package.

Thin contracts over LAPACK (via numpy): every routine accepts array-likes,
validates finiteness and returns complex128 results. Matrices here are small
(at most a few dozen rows), so nothing is tuned for speed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceError

DEFAULT_RANK_TOL = 1e-10


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        A = A[np.newaxis, :]
    if A.ndim != 2 or A.size == 0:
        raise ConfigError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ConfigError("matrix has non-finite entries")
    return A


@dataclass(frozen=True)
class SvdFactors:
    """Singular value decomposition ``A = U @ diag(s) @ W``.

    ``W`` is the right factor itself (numpy's ``Vh``), not its adjoint.
    """

    U: np.ndarray
    singular_values: np.ndarray
    W: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.W


def svd(A) -> SvdFactors:
    """Thin SVD with nonincreasing singular values."""
    A = as_matrix(A)
    try:
        U, s, Vh = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        # LAPACK gesdd does not report its sweep count; the cap is 30*n sweeps.
        raise ConvergenceError(f"SVD did not converge: {exc}",
                               iterations=30 * min(A.shape)) from exc
    return SvdFactors(U=U, singular_values=s, W=Vh)


def eig(A) -> np.ndarray:
    """Eigenvalues (with multiplicity) of a square matrix."""
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ConfigError(f"eig needs a square matrix, got {A.shape}")
    try:
        return np.linalg.eigvals(A).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"QR iteration did not converge: {exc}",
                               iterations=30 * A.shape[0]) from exc


def pinv(A, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse, dropping sigma_i <= rank_tol * sigma_1."""
    if not rank_tol > 0:
        raise ConfigError("rank_tol must be positive")
    f = svd(A)
    s = f.singular_values
    keep = s > rank_tol * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (f.W.conj().T * s_inv) @ f.U.conj().T


@dataclass(frozen=True)
class LeastSquaresResult:
    x: np.ndarray
    residual: float
    rank: int
    rank_deficient: bool


def solve_least_squares(A, b, rank_tol: float = DEFAULT_RANK_TOL) -> LeastSquaresResult:
    """Minimize ``||A x - b||_2``.

    Rank-deficient systems are not an error: the minimum-norm solution is
    returned and ``rank_deficient`` is set.
    """
    A = as_matrix(A)
    b = np.asarray(b, dtype=complex)
    if A.shape[0] < A.shape[1]:
        raise ConfigError(f"underdetermined system {A.shape}; need rows >= cols")
    if b.shape[0] != A.shape[0]:
        raise ConfigError(f"right-hand side has {b.shape[0]} rows, matrix has {A.shape[0]}")
    try:
        x, _, rank, _ = np.linalg.lstsq(A, b, rcond=rank_tol)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"least-squares SVD did not converge: {exc}") from exc
    residual = float(np.linalg.norm(A @ x - b))
    return LeastSquaresResult(x=x, residual=residual, rank=int(rank),
                              rank_deficient=int(rank) < A.shape[1])


def inf_norm(A) -> float:
    """Maximum absolute row sum; for a vector, the max modulus."""
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        return float(np.max(np.abs(A))) if A.size else 0.0
    return float(np.max(np.sum(np.abs(A), axis=1)))


def companion(coeffs) -> np.ndarray:
    """Companion matrix of the monic ``z^M + sum_k coeffs[k] z^k``.

    Ones on the subdiagonal and the negated coefficients in the last column.
    """
    q = np.asarray(coeffs, dtype=complex)
    M = q.size
    C = np.zeros((M, M), dtype=complex)
    if M > 1:
        C[np.arange(1, M), np.arange(M - 1)] = 1.0
    C[:, -1] = -q
    return C


def vandermonde(nodes, cols: int) -> np.ndarray:
    """Rows ``(1, w_i, ..., w_i^(cols-1))`` for each node ``w_i``."""
    w = np.asarray(nodes, dtype=complex)
    return w[:, np.newaxis] ** np.arange(cols)[np.newaxis, :]
