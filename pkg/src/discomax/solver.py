"""DisCoMax: maximize rho^2(X, Z) + rho^2(Z, y) over embeddings Z.

The objective stack and the three nested solvers live here.

* ``objective_f`` is the sum of squared distance correlations written as
  ``Tr(Z'SZ) / sqrt(Tr(Z'L_Z Z))``.
* ``surrogate_g`` replaces the denominator by ``Tr(Z'L_M Z)`` for a fixed
  reference ``M``.
* ``solve_subproblem`` iterates ``Z <- H Z`` to minimize the parametric
  objective ``Tr(Z'L_M Z) - alpha Tr(Z'SZ)``.
* ``golden_section_alpha`` searches the parameter ``alpha``.
* ``discomax`` is the outer minorization-maximization loop.

See ``notes on bounds`` in the README for how the ``alpha`` bracket is
chosen; the default differs from the eigenvalue bound because that bound
is identically zero whenever ``d < n - 1``.
"""

import csv
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Callable, List, NamedTuple, Optional

import numpy as np
import scipy.linalg as sla

from . import numerics
from .dcor import as_matrix, center_columns, gram_laplacian
from .errors import (
    BadDimensionError,
    ConfigError,
    DegenerateDataError,
    DegenerateDenominatorError,
    DegeneratePencilError,
    DegenerateZError,
    NonFiniteError,
    NoProgressError,
    NotPositiveDefiniteError,
    SampleCountMismatchError,
)

__all__ = [
    "SolverConfig",
    "LaplacianBundle",
    "OuterRecord",
    "GmmTrace",
    "SubproblemResult",
    "GoldenResult",
    "DisCoMaxResult",
    "build_bundle",
    "trace_self",
    "objective_f",
    "surrogate_g",
    "h_value",
    "init_Z0",
    "gamma_squared",
    "alpha_upper",
    "alpha_bracket",
    "fixed_point_matrix",
    "FixedPointOperator",
    "solve_subproblem",
    "golden_section_max",
    "golden_section_alpha",
    "rescale",
    "discomax",
    "dcorr2_centered",
    "GOLDEN",
    "TRACE_COLUMNS",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

ALPHA_BOUNDS = ("dinkelbach", "psd", "pencil_max")
ALPHA_SEARCHES = ("objective", "surrogate")


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances, caps and strategy switches for the three nested loops.

    Attributes
    ----------
    dim : int
        Embedding dimension ``d`` (``2 <= d < n``).
    outer_tol : float
        Stop when ``||Z_{k+1} - Z_k||^2 < outer_tol * ||Z_k||^2``.
    alpha_tol : float
        Golden-section stops when the bracket is below
        ``alpha_tol * initial width``.
    inner_tol : float
        Absolute tolerance on successive parametric objective values.
    T_max : int
        Cap on fixed-point iterations per inner solve.
    gamma_margin : float
        ``gamma^2 = gamma_margin * lambda_max(L_M, D_X)``.
    ridge_eps : float or None
        Diagonal ridge added to ``D_X``; ``None`` means
        ``1e-10 * trace(D_X) / n``.
    rescale_margin : float
        Target of ``Tr(Z'L_Z Z)`` after each rescale.
    max_outer : int
        Cap on outer iterations.
    alpha_bound : {"dinkelbach", "psd", "pencil_max"}
        Upper end of the ``alpha`` bracket.  ``"psd"`` is the smallest
        eigenvalue of the pencil ``(L_M, S)``, ``"pencil_max"`` the largest,
        ``"dinkelbach"`` is ``min(h(M, M), (1 - convex_slack) * alpha_cvx)``.
    alpha_search : {"objective", "surrogate"}
        Score maximized by the golden-section search: the best ``f`` reached
        along the inner path, or the inner parametric value ``G(alpha)``.
    patience : int
        In ``"objective"`` mode, stop an inner path after this many steps
        without improving ``f``.
    convex_slack : float
        Keeps ``gamma^2 D - alpha S`` strictly positive definite.
    damping_factor : float
        Multiplier on ``gamma_margin`` after an outer step fails to improve.
    max_damping : int
        Number of damping retries before declaring a stall.
    monotone_tol : float
        Allowed decrease of ``f`` between accepted outer iterates.
    check_spectral : bool
        Record the spectral radius of each accepted ``H`` (costs O(n^3)).
    verbose_inner : bool
        Keep the inner parametric values of each accepted step.
    """

    dim: int = 3
    outer_tol: float = 1e-6
    alpha_tol: float = 1e-4
    inner_tol: float = 1e-8
    T_max: int = 220
    gamma_margin: float = 1.01
    ridge_eps: Optional[float] = None
    rescale_margin: float = 1.0
    max_outer: int = 50
    alpha_bound: str = "dinkelbach"
    alpha_search: str = "objective"
    patience: int = 10
    convex_slack: float = 1e-3
    damping_factor: float = 2.0
    max_damping: int = 30
    monotone_tol: float = 1e-8
    check_spectral: bool = False
    verbose_inner: bool = False

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ConfigError("dim must be an integer >= 2")
        for name in ("outer_tol", "alpha_tol", "inner_tol", "convex_slack"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.ridge_eps is not None and self.ridge_eps < 0:
            raise ConfigError("ridge_eps must be non-negative")
        if self.T_max < 1 or self.max_outer < 0 or self.patience < 1:
            raise ConfigError("iteration caps must be positive")
        if not self.gamma_margin > 1:
            raise ConfigError("gamma_margin must exceed 1")
        if not self.rescale_margin >= 1:
            raise ConfigError("rescale_margin must be at least 1")
        if not self.damping_factor > 1 or self.max_damping < 0:
            raise ConfigError("damping_factor must exceed 1")
        if self.alpha_bound not in ALPHA_BOUNDS:
            raise ConfigError(f"alpha_bound must be one of {ALPHA_BOUNDS}")
        if self.alpha_search not in ALPHA_SEARCHES:
            raise ConfigError(f"alpha_search must be one of {ALPHA_SEARCHES}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class LaplacianBundle:
    """Laplacians of a dataset and the combined matrix ``S``.

    ``S = k_X L_X + k_Y L_y`` with ``k = 1/sqrt(Tr(X'L_X X))`` so that
    ``Tr(Z'SZ)/sqrt(Tr(Z'L_Z Z))`` is the sum of two squared distance
    correlations.
    """

    X: np.ndarray
    y: np.ndarray
    L_X: np.ndarray
    L_y: np.ndarray
    d_x: np.ndarray
    S: np.ndarray
    k_X: float
    k_Y: float
    ridge: float
    F: np.ndarray

    # S = F F' with F = [sqrt(2 k_X) X~, sqrt(2 k_Y) y~], so every product
    # with S costs O(n p d) instead of O(n^2 d).

    @property
    def n(self):
        return self.L_X.shape[0]

    @property
    def D_X(self):
        return np.diag(self.d_x)

    @cached_property
    def d_reg(self):
        """Diagonal of ``D_X + ridge * I``."""
        return self.d_x + self.ridge

    @cached_property
    def core(self):
        """``F' D^{-1} F``; shares its nonzero spectrum with ``(S, D)``."""
        C = self.F.T @ (self.F / self.d_reg[:, None])
        return 0.5 * (C + C.T)

    @cached_property
    def alpha_cvx_unit(self):
        """``1 / lambda_max(S, D)``: ``gamma^2 D - alpha S`` is PD below
        ``gamma^2`` times this value."""
        top = numerics.sym_eig(self.core).values[-1]
        return np.inf if top <= 0 else 1.0 / top

    def quad_S(self, Z):
        """``Tr(Z'SZ)``."""
        return float(np.sum((self.F.T @ Z) ** 2))

    @cached_property
    def gram_X(self):
        return float(np.sum((self.X.T @ self.X) ** 2))

    @cached_property
    def gram_y(self):
        return float(np.sum((self.y.T @ self.y) ** 2))


def build_bundle(X, y, ridge_eps=None):
    """Precompute ``L_X``, ``L_y``, ``D_X``, ``S`` and the constants ``k``."""
    X = as_matrix(X, "X")
    y = as_matrix(y, "y")
    if X.shape[0] != y.shape[0]:
        raise SampleCountMismatchError(
            f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    Xc, yc = center_columns(X), center_columns(y)
    L_X, L_y = gram_laplacian(Xc), gram_laplacian(yc)
    tx = float(np.sum(Xc * (L_X @ Xc)))
    ty = float(np.sum(yc * (L_y @ yc)))
    if not tx > 0:
        raise DegenerateDataError("X is constant")
    if not ty > 0:
        raise DegenerateDataError("y is constant")
    k_X, k_Y = 1.0 / math.sqrt(tx), 1.0 / math.sqrt(ty)
    S = k_X * L_X + k_Y * L_y
    d_x = np.diag(L_X).copy()
    n = X.shape[0]
    ridge = 1e-10 * float(np.sum(d_x)) / n if ridge_eps is None else float(ridge_eps)
    F = np.hstack([math.sqrt(2 * k_X) * Xc, math.sqrt(2 * k_Y) * yc])
    return LaplacianBundle(Xc, yc, L_X, L_y, d_x, S, k_X, k_Y, ridge, F)


def trace_self(Z):
    """``Tr(Z' L_Z Z) = 2 ||Z~' Z~||_F^2``."""
    Zc = center_columns(Z)
    return 2.0 * float(np.sum((Zc.T @ Zc) ** 2))


def _quad(A, Z):
    return float(np.sum(Z * (A @ Z)))


def objective_f(Z, bundle):
    """``Tr(Z'SZ) / sqrt(Tr(Z'L_Z Z))``."""
    Z = as_matrix(Z, "Z")
    t = trace_self(Z)
    if not t > 0:
        raise DegenerateZError("Z is constant")
    return bundle.quad_S(Z) / math.sqrt(t)


def surrogate_g(Z, M, bundle):
    """``Tr(Z'SZ) / Tr(Z'L_M Z)``."""
    Z = as_matrix(Z, "Z")
    Mc = center_columns(M)
    denom = 2.0 * float(np.sum((Mc.T @ Z) ** 2))
    if not denom > 0:
        raise DegenerateDenominatorError("Tr(Z'L_M Z) is not positive")
    return bundle.quad_S(Z) / denom


def h_value(Z, alpha, bundle, L_M):
    """Parametric objective ``Tr(Z'L_M Z) - alpha Tr(Z'SZ)``."""
    return _quad(L_M, Z) - alpha * bundle.quad_S(Z)


def init_Z0(n, d):
    """``[c J_d; 0]`` with ``c = (2(d-1))^{-1/4}`` so that ``Tr(Z'L_Z Z) = 1``."""
    if d < 2 or d >= n:
        raise BadDimensionError(f"need 2 <= d < n, got d={d}, n={n}")
    c = (2.0 * (d - 1)) ** -0.25
    Z = np.zeros((n, d))
    Z[:d] = c * (np.eye(d) - 1.0 / d)
    return Z


def dcorr2_centered(A, B, gram_A=None, gram_B=None):
    """Squared distance correlation of column-centered ``A`` and ``B``.

    Uses ``||A'B||^2 / sqrt(||A'A||^2 ||B'B||^2)``, which equals the
    double-sum estimator for exponent 2.
    """
    ga = float(np.sum((A.T @ A) ** 2)) if gram_A is None else gram_A
    gb = float(np.sum((B.T @ B) ** 2)) if gram_B is None else gram_B
    if ga <= 0 or gb <= 0:
        return 0.0
    return float(np.sum((A.T @ B) ** 2) / math.sqrt(ga * gb))


def gamma_squared(bundle, L_M, config):
    """``gamma_margin * max z'L_M z / z'D z`` over the regularized ``D``."""
    s = 1.0 / np.sqrt(bundle.d_reg)
    if not np.all(np.isfinite(s)):
        raise DegeneratePencilError("D_X has zero diagonal entries and no ridge")
    C = np.asarray(L_M) * s[:, None] * s[None, :]
    top = float(sla.eigvalsh(0.5 * (C + C.T), subset_by_index=[C.shape[0] - 1] * 2)[0])
    return config.gamma_margin * max(top, 0.0)


def _lambda_max_low_rank(Mc, bundle):
    # nonzero spectrum of 2 D^{-1/2} M M' D^{-1/2} equals that of 2 M'D^{-1}M
    G = Mc.T @ (Mc / bundle.d_reg[:, None])
    return 2.0 * float(np.max(np.linalg.eigvalsh(0.5 * (G + G.T))))


def _range_basis(A, rel_tol=1e-10):
    w, V = numerics.sym_eig(A)
    top = max(abs(w[0]), abs(w[-1]), 0.0)
    return V[:, w > rel_tol * top] if top > 0 else V[:, :0]


def alpha_upper(L_M, bundle, config, kind=None, leak_tol=1e-8):
    """Generalized eigenvalue bound of the pencil ``(L_M, S)``.

    ``kind="min"`` returns ``sup{alpha : L_M - alpha S is PSD}``.  This is
    zero as soon as some direction with ``z'L_M z = 0`` has ``z'Sz > 0``
    (``S`` leaks outside the range of ``L_M``, relative tolerance
    ``leak_tol``).  Otherwise it is ``1 / lambda_max(S, L_M)`` on the range
    of ``L_M``.  ``kind="max"`` returns the largest ratio
    ``z'L_M z / z'Sz`` over the range of ``S``.  By default ``kind``
    follows ``config.alpha_bound``.
    """
    if kind is None:
        kind = "max" if config.alpha_bound == "pencil_max" else "min"
    L_M = np.asarray(L_M, dtype=float)
    S = bundle.S
    if kind == "max":
        Q = _range_basis(S)
        if Q.shape[1] == 0:
            raise DegeneratePencilError("S is zero")
        try:
            return max(numerics.gen_eig_extremes(Q.T @ L_M @ Q, Q.T @ S @ Q)[1], 0.0)
        except NotPositiveDefiniteError as exc:
            raise DegeneratePencilError(str(exc)) from exc
    P = _range_basis(L_M)
    if P.shape[1] == 0:
        return 0.0
    F = bundle.F
    leak = np.linalg.norm(F - P @ (P.T @ F))
    if leak > leak_tol * np.linalg.norm(F):
        return 0.0
    try:
        mu = numerics.gen_eig_extremes(P.T @ S @ P, P.T @ L_M @ P)[1]
    except NotPositiveDefiniteError as exc:
        raise DegeneratePencilError(str(exc)) from exc
    return math.inf if mu <= 0 else 1.0 / mu


def alpha_bracket(M, L_M, gamma2, bundle, config):
    """Upper end of the ``alpha`` search interval for reference ``M``."""
    cvx = (1.0 - config.convex_slack) * gamma2 * bundle.alpha_cvx_unit
    if config.alpha_bound == "dinkelbach":
        num = bundle.quad_S(M)
        if not num > 0:
            raise DegeneratePencilError("Tr(M'SM) is not positive")
        hi = _quad(L_M, M) / num
    else:
        hi = alpha_upper(L_M, bundle, config)
    return float(min(hi, cvx))


def fixed_point_matrix(gamma2, alpha, bundle, L_M, rank_tol=None):
    """``H = (gamma^2 D - alpha S)^+ (gamma^2 D - L_M)`` formed explicitly."""
    D = np.diag(bundle.d_reg)
    A = gamma2 * D - alpha * bundle.S
    return numerics.pinv_psd(A, rank_tol) @ (gamma2 * D - np.asarray(L_M))


class FixedPointOperator:
    """Applies ``H`` without forming it.

    With ``S = FF'`` and ``C = F'D^{-1}F`` the Woodbury identity gives
    ``(gamma^2 D - alpha S)^{-1} = D^{-1}/gamma^2
    + D^{-1} F (gamma^2/alpha I - C)^{-1} F' D^{-1} / gamma^2``,
    valid whenever ``gamma^2 D - alpha S`` is positive definite.  Passing
    the reference ``M`` lets ``L_M Z = 2 M~(M~'Z)`` be applied in
    factored form too.  Otherwise the explicit pseudoinverse is used.
    """

    def __init__(self, bundle, gamma2, alpha, L_M, M=None):
        self.bundle = bundle
        self.gamma2 = float(gamma2)
        self.alpha = float(alpha)
        self.L_M = np.asarray(L_M)
        self._Mc = None if M is None else center_columns(M)
        self.fast = self.gamma2 > 0 and self.alpha >= 0
        if self.fast and self.alpha > 0:
            C = bundle.core
            inner = self.gamma2 / self.alpha * np.eye(C.shape[0]) - C
            w = np.linalg.eigvalsh(inner)
            self.fast = bool(w[0] > numerics.default_rank_tol(bundle.n) * max(abs(w[-1]), 1.0))
            if self.fast:
                self._inner = sla.cho_factor(inner)
        if not self.fast:
            self._H = fixed_point_matrix(gamma2, alpha, bundle, L_M)

    def _LMZ(self, Z):
        if self._Mc is not None:
            return 2.0 * (self._Mc @ (self._Mc.T @ Z))
        return self.L_M @ Z

    def apply(self, Z):
        if not self.fast:
            return self._H @ Z
        d = self.bundle.d_reg[:, None]
        R = (self.gamma2 * d * Z - self._LMZ(Z)) / d
        if self.alpha > 0:
            F = self.bundle.F
            R = R + (F @ sla.cho_solve(self._inner, F.T @ R)) / d
        return R / self.gamma2

    def matrix(self):
        """Explicit ``H`` (O(n^3))."""
        if not self.fast:
            return self._H
        return self.apply(np.eye(self.bundle.n))

    def h_value(self, Z):
        if self._Mc is not None:
            return 2.0 * float(np.sum((self._Mc.T @ Z) ** 2)) - self.alpha * self.bundle.quad_S(Z)
        return h_value(Z, self.alpha, self.bundle, self.L_M)

    def spectral_radius(self):
        """Largest ``|lambda|`` of ``H``; real because ``H = A^{-1}B`` with
        ``A`` positive definite and ``B`` symmetric."""
        D = np.diag(self.bundle.d_reg)
        A = self.gamma2 * D - self.alpha * self.bundle.S
        B = self.gamma2 * D - self.L_M
        if self.fast:
            lo, hi = numerics.gen_eig_extremes(B, A)
            return max(abs(lo), abs(hi))
        return float(np.max(np.abs(np.linalg.eigvals(self._H))))


class SubproblemResult(NamedTuple):
    F_alpha: float
    Z: np.ndarray
    iters: int
    h_values: List[float]
    stop_reason: str


def solve_subproblem(alpha, M, bundle, config, *, gamma2=None, L_M=None,
                    operator=None, monitor=None):
    """Minimize ``Tr(Z'L_M Z) - alpha Tr(Z'SZ)`` by ``Z <- H Z`` from ``M``.

    Iterates are re-centered after every product; the parametric value
    depends only on the centered part, so this leaves the sequence of
    objective values untouched while keeping every iterate centered.

    Parameters
    ----------
    monitor : callable, optional
        ``monitor(t, Z_t) -> bool``; returning True stops the iteration.

    Returns
    -------
    SubproblemResult
        Final parametric value, final iterate, iteration count, the full
        sequence of parametric values and the reason for stopping.
    """
    M = center_columns(M)
    if L_M is None:
        L_M = gram_laplacian(M)
    if gamma2 is None:
        gamma2 = gamma_squared(bundle, L_M, config)
    op = operator or FixedPointOperator(bundle, gamma2, alpha, L_M, M)
    Z = M
    norm0 = float(np.linalg.norm(M))
    h_prev = op.h_value(Z)
    hv = [h_prev]
    reason = "max_iter"
    t = 0
    while t < config.T_max:
        Z = op.apply(Z)
        Z = Z - Z.mean(axis=0)
        t += 1
        nz = float(np.linalg.norm(Z))
        if not math.isfinite(nz) or nz > 1e60 * norm0:
            raise NonFiniteError(f"fixed-point iterates diverge at t={t}")
        if nz < 1e-12 * norm0:
            raise NoProgressError(f"fixed-point iterates collapse to zero at t={t}")
        h_new = op.h_value(Z)
        hv.append(h_new)
        if monitor is not None and monitor(t, Z):
            reason = "monitor"
            break
        if abs(h_new - h_prev) < config.inner_tol:
            reason = "tol"
            break
        h_prev = h_new
    return SubproblemResult(hv[-1], Z, t, hv, reason)


class GoldenSearch(NamedTuple):
    x: float
    lo: float
    hi: float
    steps: int
    evaluations: List[tuple]


def golden_section_max(func, lo, hi, tol):
    """Golden-section search for the maximizer of a unimodal ``func``.

    Probes sit at ``hi + r (lo - hi)`` and ``lo + r (hi - lo)`` with
    ``r = (sqrt(5) - 1)/2``; the bracket shrinks by ``r`` per step until
    its width falls below ``tol``.  Returns the bracket midpoint.
    """
    evals = []

    def probe(x):
        v = func(x)
        evals.append((x, v))
        return v

    if not hi - lo > tol:
        return GoldenSearch(0.5 * (lo + hi), lo, hi, 0, evals)
    beta = hi + GOLDEN * (lo - hi)
    delta = lo + GOLDEN * (hi - lo)
    fb, fd = probe(beta), probe(delta)
    steps = 0
    while hi - lo >= tol:
        if fb > fd:
            hi, delta, fd = delta, beta, fb
            beta = hi + GOLDEN * (lo - hi)
            fb = probe(beta)
        else:
            lo, beta, fb = beta, delta, fd
            delta = lo + GOLDEN * (hi - lo)
            fd = probe(delta)
        steps += 1
    return GoldenSearch(0.5 * (lo + hi), lo, hi, steps, evals)


class _BestF:
    """Monitor tracking the iterate with the largest ``f`` along a path."""

    def __init__(self, bundle, M, patience):
        self.bundle = bundle
        self.patience = patience
        self.f0 = objective_f(M, bundle)
        self.best = (self.f0, 0, M)
        self.since = 0

    def __call__(self, t, Z):
        try:
            fz = objective_f(Z, self.bundle)
        except DegenerateZError:
            fz = -math.inf
        if fz > self.best[0]:
            self.best = (fz, t, Z)
            self.since = 0
        else:
            self.since += 1
        return self.since >= self.patience


class GoldenResult(NamedTuple):
    alpha_star: float
    Z_next: np.ndarray
    improved: bool
    alpha_hi: float
    inner_iters: int
    solve: SubproblemResult
    operator: FixedPointOperator
    search: GoldenSearch


def _improves(f_new, f_old):
    return f_new > f_old + 1e-12 * max(1.0, abs(f_old))


def golden_section_alpha(M, bundle, config, *, gamma2=None, L_M=None, alpha_hi=None):
    """Search ``alpha`` in ``[0, alpha_hi]`` and solve the subproblem at the optimum.

    In ``"surrogate"`` mode each probe is scored by the final parametric value
    ``G(alpha)`` and the returned iterate is the last inner iterate.  In
    ``"objective"`` mode each probe is scored by the largest ``f`` reached
    along the inner path and the returned iterate is that best one.
    """
    M = center_columns(M)
    if L_M is None:
        L_M = gram_laplacian(M)
    if gamma2 is None:
        gamma2 = gamma_squared(bundle, L_M, config)
    if alpha_hi is None:
        alpha_hi = alpha_bracket(M, L_M, gamma2, bundle, config)
    objective_mode = config.alpha_search == "objective"

    def run(alpha):
        op = FixedPointOperator(bundle, gamma2, alpha, L_M, M)
        mon = _BestF(bundle, M, config.patience) if objective_mode else None
        res = solve_subproblem(alpha, M, bundle, config, gamma2=gamma2, L_M=L_M,
                              operator=op, monitor=mon)
        return res, op, mon

    def score(alpha):
        try:
            res, _, mon = run(alpha)
        except (NoProgressError, NonFiniteError):
            return -math.inf
        return mon.best[0] if objective_mode else res.F_alpha

    tol = config.alpha_tol * alpha_hi
    search = golden_section_max(score, 0.0, alpha_hi, tol)
    alpha_star = search.x
    try:
        res, op, mon = run(alpha_star)
    except (NoProgressError, NonFiniteError):
        return GoldenResult(alpha_star, M, False, alpha_hi, 0, None, None, search)
    f0 = objective_f(M, bundle)
    if objective_mode:
        f_best, t_best, Z_next = mon.best
        improved = t_best > 0 and _improves(f_best, f0)
    else:
        Z_next = res.Z
        improved = _improves(objective_f(Z_next, bundle), f0)
    return GoldenResult(alpha_star, Z_next, improved, alpha_hi, res.iters, res, op, search)


def rescale(Z, config):
    """Scale ``Z`` so that ``Tr(Z'L_Z Z) = rescale_margin``; returns ``(Z, kappa)``."""
    Z = as_matrix(Z, "Z")
    t = trace_self(Z)
    if not t > 0:
        raise DegenerateZError("cannot rescale a constant Z")
    kappa = (config.rescale_margin / t) ** 0.25
    return kappa * Z, float(kappa)


TRACE_COLUMNS = ("k", "f", "dcorr2_XZ", "dcorr2_Zy", "alpha_star", "kappa", "inner_iters")


@dataclass
class OuterRecord:
    """One accepted outer iterate plus the diagnostics of the step to it.

    ``trace_next``, ``trace_cross`` and ``trace_prev`` are
    ``Tr(Z'L_Z Z)``, ``Tr(Z'L_M Z)`` and ``Tr(M'L_M M)`` for the new iterate
    ``Z`` before rescaling and the previous iterate ``M``.
    """

    k: int
    f: float
    dcorr2_XZ: float
    dcorr2_Zy: float
    alpha_star: float = math.nan
    kappa: float = 1.0
    inner_iters: int = 0
    gamma2: float = math.nan
    alpha_hi: float = math.nan
    damping: int = 0
    g_prev: float = math.nan
    g_next: float = math.nan
    trace_next: float = math.nan
    trace_cross: float = math.nan
    trace_prev: float = math.nan
    spectral_radius: float = math.nan
    h_values: Optional[List[float]] = None


@dataclass
class GmmTrace:
    """Per-outer-iteration history of a DisCoMax run."""

    records: List[OuterRecord] = field(default_factory=list)
    stop_reason: str = ""

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def f(self):
        return self.column("f")

    def rows(self):
        return [[getattr(r, c) for c in TRACE_COLUMNS] for r in self.records]

    def write(self, path, delimiter=","):
        """Export ``TRACE_COLUMNS`` as delimited text."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for row in self.rows():
                w.writerow([_fmt(v) for v in row])

    def write_inner(self, path, delimiter=","):
        """Export the inner parametric values ``(k, t, H)`` when recorded."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
            w.writerow(("k", "t", "H"))
            for r in self.records:
                for t, h in enumerate(r.h_values or []):
                    w.writerow([r.k, t, _fmt(h)])

    @classmethod
    def read(cls, path, delimiter=","):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter))
        header, body = rows[0], rows[1:]
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        recs = []
        for row in body:
            vals = dict(zip(header, row))
            recs.append(OuterRecord(
                k=int(vals["k"]), f=float(vals["f"]),
                dcorr2_XZ=float(vals["dcorr2_XZ"]), dcorr2_Zy=float(vals["dcorr2_Zy"]),
                alpha_star=float(vals["alpha_star"]), kappa=float(vals["kappa"]),
                inner_iters=int(vals["inner_iters"])))
        return cls(recs)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


class DisCoMaxResult(NamedTuple):
    Z: np.ndarray
    trace: GmmTrace
    bundle: LaplacianBundle


def _record(k, Z, bundle, **extra):
    Zc = center_columns(Z)
    gz = float(np.sum((Zc.T @ Zc) ** 2))
    return OuterRecord(
        k=k, f=objective_f(Z, bundle),
        dcorr2_XZ=dcorr2_centered(bundle.X, Zc, bundle.gram_X, gz),
        dcorr2_Zy=dcorr2_centered(Zc, bundle.y, gz, bundle.gram_y),
        **extra)


def discomax(X, y, config=None, *, bundle=None, callback: Optional[Callable] = None):
    """Maximize ``rho^2(X, Z) + rho^2(Z, y)`` over ``n x d`` embeddings ``Z``.

    Parameters
    ----------
    X : (n, p) array_like
    y : (n,) or (n, 1) array_like
    config : SolverConfig, optional
    bundle : LaplacianBundle, optional
        Reuse a bundle built for the same ``(X, y)``.
    callback : callable, optional
        Called as ``callback(record)`` after every accepted outer step.

    Returns
    -------
    DisCoMaxResult
        ``Z`` (column-centered, ``Tr(Z'L_Z Z) = rescale_margin``), the
        ``GmmTrace`` and the bundle.

    Notes
    -----
    Each outer step searches ``alpha`` by golden section for a fixed
    ``gamma^2``.  If no probe improves ``f``, ``gamma^2`` is damped by
    ``damping_factor`` and the search repeats; the run stops once
    ``max_damping`` retries fail.  ``gamma^2`` relaxes back towards
    ``gamma_margin * lambda_max`` after every success.
    """
    config = config or SolverConfig()
    if bundle is None:
        bundle = build_bundle(X, y, config.ridge_eps)
    n, d = bundle.n, config.dim
    Z = init_Z0(n, d)
    trace = GmmTrace([_record(0, Z, bundle)])
    margin = config.gamma_margin
    trace.stop_reason = "max_outer"
    for k in range(1, config.max_outer + 1):
        L_M = gram_laplacian(Z)  # dense copy only feeds the fallback path
        lam = _lambda_max_low_rank(Z, bundle)
        f_prev = trace.records[-1].f
        gs = None
        for attempt in range(config.max_damping + 1):
            gamma2 = margin * lam
            gs = golden_section_alpha(Z, bundle, config, gamma2=gamma2, L_M=L_M)
            if gs.improved:
                break
            margin *= config.damping_factor
        if not gs.improved:
            trace.stop_reason = "stalled"
            break
        Zr = gs.Z_next
        diag = dict(
            alpha_star=gs.alpha_star, inner_iters=gs.inner_iters, gamma2=gamma2,
            alpha_hi=gs.alpha_hi, damping=attempt,
            g_prev=surrogate_g(Z, Z, bundle), g_next=surrogate_g(Zr, Z, bundle),
            trace_next=trace_self(Zr), trace_cross=2.0 * float(np.sum((Z.T @ Zr) ** 2)),
            trace_prev=trace_self(Z))
        if config.check_spectral:
            diag["spectral_radius"] = gs.operator.spectral_radius()
        if config.verbose_inner:
            diag["h_values"] = list(gs.solve.h_values)
        Zn, kappa = rescale(Zr, config)
        rec = _record(k, Zn, bundle, kappa=kappa, **diag)
        if rec.f < f_prev - config.monotone_tol:
            raise NoProgressError(f"f decreased from {f_prev} to {rec.f} at k={k}")
        trace.records.append(rec)
        if callback is not None:
            callback(rec)
        step = float(np.sum((Zn - Z) ** 2))
        ref = float(np.sum(Z ** 2))
        Z = Zn
        if step < config.outer_tol * ref:
            trace.stop_reason = "converged"
            break
        margin = max(config.gamma_margin, margin / config.damping_factor)
    return DisCoMaxResult(Z, trace, bundle)
