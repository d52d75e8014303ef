"""Out-of-sample prediction and k-fold evaluation.

A learned embedding ``Z_train`` has no formula for new rows, so two
families of regressors are fitted: ``phi_i : x -> z_i`` for each
embedding coordinate and ``psi : z -> y``.  A test row travels
``x -> phi(x) -> psi(phi(x))``.

Kernel ridge regression with an RBF kernel is the default regressor.
The bandwidth is the median pairwise distance of the training inputs and
the ridge is ``1e-3 * n``.
"""

import math
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg as sla
from scipy.spatial.distance import cdist, pdist

from .baselines import project, save, sir
from .dcor import as_matrix
from .errors import (
    AllConstantError,
    DimensionMismatchError,
    DisCoMaxError,
    SingularSystemError,
    TooFewSamplesError,
)
from .solver import GmmTrace, SolverConfig, discomax

__all__ = [
    "Scaler",
    "fit_scaler",
    "rbf_kernel",
    "median_bandwidth",
    "KernelRegressor",
    "krr_fit",
    "krr_predict",
    "EmbeddingModel",
    "fit_embedding_model",
    "predict",
    "rms",
    "fold_indices",
    "CellResult",
    "kfold_cv",
    "METHODS",
]


@dataclass(frozen=True)
class Scaler:
    """Per-column affine map ``(x - shift) / scale`` on retained columns."""

    kind: str
    shift: np.ndarray
    scale: np.ndarray
    keep: np.ndarray

    def apply(self, X):
        X = as_matrix(X)
        if X.shape[1] != self.keep.size:
            raise DimensionMismatchError(
                f"scaler fitted on {self.keep.size} columns, got {X.shape[1]}")
        return (X[:, self.keep] - self.shift) / self.scale

    def invert(self, Xs):
        return as_matrix(Xs) * self.scale + self.shift


def fit_scaler(X, kind="zscore"):
    """Fit a ``"zscore"``, ``"minmax"`` or ``"none"`` scaler.

    Constant columns are dropped with a warning; ``AllConstantError`` is
    raised when nothing is left.
    """
    X = as_matrix(X)
    p = X.shape[1]
    if kind == "none":
        return Scaler(kind, np.zeros(p), np.ones(p), np.ones(p, dtype=bool))
    if kind == "zscore":
        shift, scale = X.mean(axis=0), X.std(axis=0)
    elif kind == "minmax":
        shift = X.min(axis=0)
        scale = X.max(axis=0) - shift
    else:
        raise ValueError(f"unknown scaler kind {kind!r}")
    keep = scale > 0
    if not keep.any():
        raise AllConstantError("every column is constant")
    if not keep.all():
        warnings.warn(f"dropping {int((~keep).sum())} constant column(s)", stacklevel=2)
    return Scaler(kind, shift[keep], scale[keep], keep)


def rbf_kernel(A, B, sigma):
    """``exp(-||a - b||^2 / (2 sigma^2))``."""
    A, B = as_matrix(A, "A"), as_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(
            f"column counts differ: {A.shape[1]} vs {B.shape[1]}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return np.exp(-cdist(A, B, "sqeuclidean") / (2.0 * sigma**2))


def median_bandwidth(X):
    """Median of the positive pairwise distances (1.0 if there are none)."""
    X = as_matrix(X)
    if X.shape[0] < 2:
        return 1.0
    d = pdist(X)
    d = d[d > 0]
    return float(np.median(d)) if d.size else 1.0


@dataclass(frozen=True)
class KernelRegressor:
    """Fitted kernel ridge regressor.

    Targets are centered before solving ``(K + lambda_r I) c = t - mean``
    and the mean is added back at prediction time.
    """

    X: np.ndarray
    coef: np.ndarray
    offset: np.ndarray
    sigma: float
    lambda_r: float


def krr_fit(X, targets, sigma=None, lambda_r=None):
    X = as_matrix(X)
    T = as_matrix(targets, "targets")
    n = X.shape[0]
    if T.shape[0] != n:
        raise DimensionMismatchError("targets and inputs have different row counts")
    if n < 1:
        raise TooFewSamplesError("need at least one training row")
    sigma = median_bandwidth(X) if sigma is None else float(sigma)
    lambda_r = 1e-3 * n if lambda_r is None else float(lambda_r)
    if lambda_r < 0:
        raise ValueError("lambda_r must be non-negative")
    offset = T.mean(axis=0)
    K = rbf_kernel(X, X, sigma)
    try:
        coef = sla.solve(K + lambda_r * np.eye(n), T - offset, assume_a="pos")
    except (sla.LinAlgError, ValueError) as exc:
        raise SingularSystemError(str(exc)) from exc
    return KernelRegressor(X, coef, offset, sigma, lambda_r)


def krr_predict(model, X):
    X = as_matrix(X)
    if X.shape[1] != model.X.shape[1]:
        raise DimensionMismatchError(
            f"model expects {model.X.shape[1]} columns, got {X.shape[1]}")
    return rbf_kernel(X, model.X, model.sigma) @ model.coef + model.offset


@dataclass
class EmbeddingModel:
    """``Z_train`` plus the maps ``phi`` (x -> z_i) and ``psi`` (z -> y)."""

    Z_train: np.ndarray
    phi: List[KernelRegressor]
    psi: KernelRegressor
    x_scaler: Scaler
    z_scaler: Scaler
    y_scaler: Scaler
    trace: Optional[GmmTrace] = None

    @property
    def dim(self):
        return len(self.phi)

    def embed(self, X):
        """Out-of-sample embedding ``phi(x)`` in scaled ``z`` units."""
        Xs = self.x_scaler.apply(X)
        return np.column_stack([krr_predict(m, Xs)[:, 0] for m in self.phi])

    def predict_scaled(self, X):
        return krr_predict(self.psi, self.embed(X))


def fit_embedding_model(X_train, y_train, config=None, *, x_scaling="zscore",
                        y_scaling="minmax", sigma=None, lambda_r=None):
    """Run DisCoMax on the scaled training data and fit ``phi`` and ``psi``."""
    config = config or SolverConfig()
    x_scaler = fit_scaler(X_train, x_scaling)
    y_scaler = fit_scaler(y_train, y_scaling)
    Xs, ys = x_scaler.apply(X_train), y_scaler.apply(y_train)
    res = discomax(Xs, ys, config)
    z_scaler = fit_scaler(res.Z, "zscore")
    Zs = z_scaler.apply(res.Z)
    phi = [krr_fit(Xs, Zs[:, i], sigma, lambda_r) for i in range(Zs.shape[1])]
    psi = krr_fit(Zs, ys, sigma, lambda_r)
    return EmbeddingModel(res.Z, phi, psi, x_scaler, z_scaler, y_scaler, res.trace)


def predict(model, X_test):
    """Predictions in the original response units."""
    return model.y_scaler.invert(model.predict_scaled(X_test))


def rms(a, b):
    a, b = as_matrix(a), as_matrix(b)
    return float(math.sqrt(np.mean((a - b) ** 2)))


def fold_indices(n, k, seed):
    """Seeded shuffle followed by a contiguous split into ``k`` folds."""
    if k < 2 or k > n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


# Method runners: fit on scaled training data, return scaled test predictions.

def _run_discomax(Xs, ys, Xt, d, cfg, reg):
    model = fit_embedding_model(Xs, ys, replace(cfg, dim=d),
                                x_scaling="none", y_scaling="none", **reg)
    return model.predict_scaled(Xt), model.trace


def _linear_sdr(fn):
    def run(Xs, ys, Xt, d, cfg, reg):
        proj = fn(Xs, ys, d)
        Zs = project(Xs, proj)
        zsc = fit_scaler(Zs, "zscore")
        psi = krr_fit(zsc.apply(Zs), ys, **reg)
        return krr_predict(psi, zsc.apply(project(Xt, proj))), None
    return run


def _run_full(Xs, ys, Xt, d, cfg, reg):
    return krr_predict(krr_fit(Xs, ys, **reg), Xt), None


def _run_mean(Xs, ys, Xt, d, cfg, reg):
    return np.full((Xt.shape[0], 1), float(np.mean(ys))), None


METHODS = {
    "discomax": _run_discomax,
    "sir": _linear_sdr(sir),
    "save": _linear_sdr(save),
    "full": _run_full,
    "mean": _run_mean,
}

#: methods whose result does not depend on the embedding dimension
DIMENSIONLESS = ("full", "mean")


@dataclass
class CellResult:
    """Cross-validated RMS for one (method, d) cell."""

    method: str
    dim: int
    fold_rms: List[float] = field(default_factory=list)
    wall_time: float = 0.0
    error: Optional[Dict[str, str]] = None
    traces: List[GmmTrace] = field(default_factory=list)

    @property
    def mean_rms(self):
        return float(np.mean(self.fold_rms)) if self.fold_rms and self.error is None else math.nan

    @property
    def std_rms(self):
        return float(np.std(self.fold_rms)) if self.fold_rms and self.error is None else math.nan


def kfold_cv(X, y, methods=("discomax",), dims=(3,), k=5, seed=0, config=None, *,
             x_scaling="zscore", y_scaling="minmax", sigma=None, lambda_r=None,
             progress=None):
    """k-fold RMS of each method at each dimension, on shared folds.

    Scalers are fitted on each training fold.  RMS is reported in scaled
    response units.  Errors in one cell are recorded and do not stop the
    other cells.

    Returns
    -------
    list of CellResult
        One entry per (method, d) in request order; dimension-free methods
        (``"full"``, ``"mean"``) yield a single cell with ``dim = p``.
    """
    X, y = as_matrix(X, "X"), as_matrix(y, "y")
    config = config or SolverConfig()
    folds = fold_indices(X.shape[0], k, seed)
    reg = {"sigma": sigma, "lambda_r": lambda_r}
    cells = []
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
        cell_dims = [X.shape[1]] if method in DIMENSIONLESS else list(dims)
        for d in cell_dims:
            cell = CellResult(method, int(d))
            t0 = time.perf_counter()
            try:
                for i, test in enumerate(folds):
                    train = np.setdiff1d(np.arange(X.shape[0]), test)
                    xs = fit_scaler(X[train], x_scaling)
                    ysc = fit_scaler(y[train], y_scaling)
                    Xs, Xt = xs.apply(X[train]), xs.apply(X[test])
                    ys, yt = ysc.apply(y[train]), ysc.apply(y[test])
                    pred, tr = METHODS[method](Xs, ys, Xt, int(d), config, reg)
                    cell.fold_rms.append(rms(pred, yt))
                    if tr is not None:
                        cell.traces.append(tr)
                    if progress is not None:
                        progress(method, d, i)
            except DisCoMaxError as exc:
                cell.error = {"type": type(exc).__name__, "message": str(exc)}
            except (ValueError, np.linalg.LinAlgError) as exc:
                cell.error = {"type": type(exc).__name__, "message": str(exc)}
            cell.wall_time = time.perf_counter() - t0
            cells.append(cell)
    return cells
