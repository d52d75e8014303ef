"""Dense symmetric linear-algebra kernels.

All routines take plain ``numpy`` arrays, never modify their inputs and
delegate the heavy lifting to LAPACK through :mod:`scipy.linalg`.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import NonConvergenceError, NonFiniteError, NotPositiveDefiniteError

__all__ = [
    "EigenPair",
    "sym_eig",
    "gen_eig_extremes",
    "pinv_psd",
    "default_rank_tol",
    "regularize",
    "centered_basis",
]


class EigenPair(NamedTuple):
    """Eigenvalues in ascending order and matching orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def _symmetric(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    # symmetrize to remove rounding asymmetry from upstream products
    return 0.5 * (A + A.T)


def sym_eig(A):
    """Eigendecomposition of a real symmetric matrix.

    Parameters
    ----------
    A : (m, m) array_like
        Symmetric matrix with finite entries.

    Returns
    -------
    EigenPair
        ``values`` ascending, ``vectors`` orthonormal columns.

    Raises
    ------
    NonFiniteError
        If ``A`` contains NaN or Inf.
    NonConvergenceError
        If LAPACK fails to converge.
    """
    A = _symmetric(A)
    try:
        w, V = sla.eigh(A)
    except sla.LinAlgError as exc:
        raise NonConvergenceError(str(exc)) from exc
    return EigenPair(w, V)


def regularize(B, scale=1e-10):
    """Return ``B + eps*I`` with ``eps = scale * trace(B) / order``."""
    B = np.asarray(B, dtype=float)
    m = B.shape[0]
    eps = scale * np.trace(B) / m
    return B + eps * np.eye(m)


def gen_eig_extremes(A, B):
    """Smallest and largest Rayleigh quotient ``x'Ax / x'Bx``.

    ``B`` is whitened by its Cholesky factor ``B = LL'`` and the extremes
    are read off the ordinary spectrum of ``L^{-1} A L^{-T}``.

    Raises
    ------
    NotPositiveDefiniteError
        If ``B`` is not positive definite.
    """
    A = _symmetric(A, "A")
    B = _symmetric(B, "B")
    if A.shape != B.shape:
        raise ValueError(f"pencil shapes differ: {A.shape} vs {B.shape}")
    try:
        L = sla.cholesky(B, lower=True)
    except sla.LinAlgError as exc:
        raise NotPositiveDefiniteError("B is not positive definite") from exc
    if np.min(np.diag(L)) <= 0:
        raise NotPositiveDefiniteError("B is not positive definite")
    W = sla.solve_triangular(L, A, lower=True)
    C = sla.solve_triangular(L, W.T, lower=True)
    w = sym_eig(C).values
    return float(w[0]), float(w[-1])


def default_rank_tol(order):
    """Relative rank threshold ``order * machine epsilon``."""
    return order * np.finfo(float).eps


def pinv_psd(A, rank_tol=None):
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Eigenvalues larger than ``rank_tol * lambda_max`` are inverted and the
    rest are treated as zero.  ``rank_tol`` defaults to
    :func:`default_rank_tol`.
    """
    A = _symmetric(A)
    if rank_tol is None:
        rank_tol = default_rank_tol(A.shape[0])
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    w, V = sym_eig(A)
    top = np.max(np.abs(w)) if w.size else 0.0
    if top == 0.0:
        return np.zeros_like(A)
    keep = w > rank_tol * top
    Vk = V[:, keep]
    return (Vk / w[keep]) @ Vk.T


def centered_basis(n):
    """Orthonormal basis (n, n-1) of the vectors orthogonal to the ones vector."""
    if n < 2:
        raise ValueError("need n >= 2")
    # Helmert-style construction: QR of the centering matrix minus its last column
    J = np.eye(n) - 1.0 / n
    Q, _ = np.linalg.qr(J[:, : n - 1])
    return Q
