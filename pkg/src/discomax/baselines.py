"""Sliced inverse regression (SIR) and sliced average variance estimation (SAVE).

Both whiten ``X``, sort the response into quantile slices and take the
top eigenvectors of a slice-based kernel matrix.  The directions are
mapped back to the original coordinates through the whitening matrix.
"""

from typing import NamedTuple

import numpy as np

from . import numerics
from .dcor import as_matrix
from .errors import (
    BadDimensionError,
    DimensionMismatchError,
    EmptySliceError,
    SampleCountMismatchError,
    SingularCovarianceError,
)

__all__ = ["Projection", "whiten", "slice_indices", "sir", "save", "project"]


class Projection(NamedTuple):
    """Directions ``B`` (p x d) with the kernel eigenvalues, descending."""

    B: np.ndarray
    slice_count: int
    eigenvalues: np.ndarray


def whiten(X, ridge=1e-8, cond_limit=1e12):
    """Return ``(Xw, W, mean)`` with ``Xw = (X - mean) W`` of identity covariance.

    ``W = Sigma^{-1/2}``.  When the condition number of ``Sigma`` exceeds
    ``cond_limit`` the ridge ``eps = ridge * trace(Sigma) / p`` is added
    first and the whitened covariance is then only close to identity.
    """
    X = as_matrix(X)
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / X.shape[0]
    p = cov.shape[0]
    tr = np.trace(cov)
    if not tr > 0:
        raise SingularCovarianceError("X has zero variance")
    w, V = numerics.sym_eig(cov)
    if w[0] <= w[-1] / cond_limit:
        w, V = numerics.sym_eig(cov + ridge * tr / p * np.eye(p))
    W = (V / np.sqrt(w)) @ V.T
    return Xc @ W, W, mean


def slice_indices(y, n_slices):
    """Split sample indices into ``n_slices`` groups of sorted ``y``."""
    y = as_matrix(y, "y")[:, 0]
    if n_slices < 2:
        raise ValueError("n_slices must be at least 2")
    if n_slices > y.size:
        raise EmptySliceError(f"{n_slices} slices for {y.size} samples")
    order = np.argsort(y, kind="stable")
    return np.array_split(order, n_slices)


def _check(X, y, d):
    X, y = as_matrix(X, "X"), as_matrix(y, "y")
    if X.shape[0] != y.shape[0]:
        raise SampleCountMismatchError("X and y have different row counts")
    if not 1 <= d <= X.shape[1]:
        raise BadDimensionError(f"need 1 <= d <= p={X.shape[1]}, got {d}")
    return X, y


def _directions(K, W, d, n_slices):
    w, V = numerics.sym_eig(K)
    order = np.argsort(w)[::-1]
    B = W @ V[:, order[:d]]
    return Projection(B, n_slices, w[order])


def sir(X, y, d, n_slices=10):
    """Top-``d`` directions of the between-slice covariance of whitened means."""
    X, y = _check(X, y, d)
    Xw, W, _ = whiten(X)
    n = X.shape[0]
    K = np.zeros((X.shape[1],) * 2)
    for idx in slice_indices(y, n_slices):
        m = Xw[idx].mean(axis=0)
        K += len(idx) / n * np.outer(m, m)
    return _directions(K, W, d, n_slices)


def save(X, y, d, n_slices=10):
    """Top-``d`` directions of ``sum_s p_s (I - V_s)^2``."""
    X, y = _check(X, y, d)
    Xw, W, _ = whiten(X)
    n, p = X.shape
    K = np.zeros((p, p))
    eye = np.eye(p)
    for idx in slice_indices(y, n_slices):
        Xs = Xw[idx] - Xw[idx].mean(axis=0)
        A = eye - Xs.T @ Xs / len(idx)
        K += len(idx) / n * A @ A
    return _directions(K, W, d, n_slices)


def project(X, proj):
    """``Z = X B``."""
    X = as_matrix(X)
    if X.shape[1] != proj.B.shape[0]:
        raise DimensionMismatchError(
            f"projection expects {proj.B.shape[0]} columns, got {X.shape[1]}")
    return X @ proj.B
