"""Sample distance covariance and correlation with exponent 2.

Two equivalent routes are provided.  The direct route builds the
pairwise squared-distance matrix, double-centers it and sums the
elementwise product.  The Laplacian route uses ``L = 2 X~ X~'`` for the
column-centered data ``X~`` and evaluates ``(2/n^2) Tr(X' L_Y X)``.

Every function accepts raw data and centers it internally, so callers
never need to pre-center.  One-dimensional inputs are treated as a
single column.
"""

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    DimensionMismatchError,
    NonFiniteError,
    NonSquareError,
    SampleCountMismatchError,
    TooFewSamplesError,
)

__all__ = [
    "as_matrix",
    "center_columns",
    "is_centered",
    "squared_distance_matrix",
    "double_center",
    "laplacian_from_data",
    "gram_laplacian",
    "sample_dcov2",
    "sample_dcorr2",
    "dcov2_via_laplacian",
]


def as_matrix(X, name="X"):
    """Return ``X`` as a finite 2-D float array (vectors become columns)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got {X.ndim} dimensions")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return X


def center_columns(X):
    """Subtract column means."""
    X = as_matrix(X)
    return X - X.mean(axis=0)


def is_centered(X, tol=1e-12):
    """True when every column sum is below ``n * tol`` (relative to scale)."""
    X = as_matrix(X)
    scale = max(1.0, float(np.max(np.abs(X)))) if X.size else 1.0
    return bool(np.all(np.abs(X.sum(axis=0)) <= X.shape[0] * tol * scale))


def squared_distance_matrix(X):
    """Matrix of squared Euclidean distances between rows of ``X``."""
    X = as_matrix(X)
    if X.shape[0] < 2:
        raise TooFewSamplesError("need at least two samples")
    E = cdist(X, X, metric="sqeuclidean")
    np.fill_diagonal(E, 0.0)
    return E


def double_center(E):
    """Compute ``J E J`` with ``J = I - 11'/n``."""
    E = np.asarray(E, dtype=float)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {E.shape}")
    E = E - E.mean(axis=0, keepdims=True)
    return E - E.mean(axis=1, keepdims=True)


def laplacian_from_data(X):
    """Laplacian ``D - W`` of the weight matrix ``W = J E J``.

    Row sums of a double-centered matrix vanish, so ``D`` is zero up to
    rounding and the result equals ``2 X~ X~'``.
    """
    W = double_center(squared_distance_matrix(X))
    L = np.diag(W.sum(axis=1)) - W
    return 0.5 * (L + L.T)


def gram_laplacian(X):
    """Fast path for the same Laplacian: ``2 X~ X~'``."""
    Xc = center_columns(X)
    return 2.0 * (Xc @ Xc.T)


def _pair(X, Y):
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise SampleCountMismatchError(
            f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
    return X, Y


def sample_dcov2(X, Y):
    """Squared sample distance covariance ``(1/n^2) sum E^_X * E^_Y``."""
    X, Y = _pair(X, Y)
    n = X.shape[0]
    EX = double_center(squared_distance_matrix(X))
    EY = double_center(squared_distance_matrix(Y))
    return float(np.sum(EX * EY) / n**2)


def sample_dcorr2(X, Y):
    """Squared sample distance correlation.

    Returns exactly 0 when either distance variance is zero.
    """
    X, Y = _pair(X, Y)
    n = X.shape[0]
    EX = double_center(squared_distance_matrix(X))
    EY = double_center(squared_distance_matrix(Y))
    vxy = np.sum(EX * EY) / n**2
    denom = (np.sum(EX * EX) / n**2) * (np.sum(EY * EY) / n**2)
    if denom <= 0.0:
        return 0.0
    return float(vxy / np.sqrt(denom))


def dcov2_via_laplacian(X, L_Y):
    """Squared sample distance covariance ``(2/n^2) Tr(X' L_Y X)``."""
    X = center_columns(X)
    L_Y = np.asarray(L_Y, dtype=float)
    n = X.shape[0]
    if L_Y.shape != (n, n):
        raise DimensionMismatchError(
            f"Laplacian of shape {L_Y.shape} does not match {n} samples")
    return float(2.0 / n**2 * np.sum(X * (L_Y @ X)))
