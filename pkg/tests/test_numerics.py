import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discomax.errors import NonFiniteError, NotPositiveDefiniteError
from discomax.numerics import centered_basis, gen_eig_extremes, pinv_psd, regularize, sym_eig


def rand_sym(rng, m):
    A = rng.standard_normal((m, m))
    return A + A.T


def test_sym_eig_diagonal():
    np.testing.assert_allclose(sym_eig(np.diag([3.0, 1.0, 2.0])).values, [1, 2, 3])


def test_sym_eig_identity():
    w, V = sym_eig(np.eye(4))
    np.testing.assert_allclose(w, np.ones(4))
    np.testing.assert_allclose(V.T @ V, np.eye(4), atol=1e-12)


@pytest.mark.parametrize("m", [5, 50, 200])
def test_sym_eig_reconstruction(m):
    A = rand_sym(np.random.default_rng(m), m)
    w, V = sym_eig(A)
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(A - (V * w) @ V.T) / np.linalg.norm(A) <= 1e-10


def test_sym_eig_rejects_nan():
    A = np.eye(2)
    A[0, 1] = np.nan
    with pytest.raises(NonFiniteError):
        sym_eig(A)


def test_gen_eig_trivial():
    assert gen_eig_extremes(np.diag([2.0, 8.0]), np.eye(2)) == pytest.approx((2, 8))
    assert gen_eig_extremes(np.eye(2), np.diag([2.0, 4.0])) == pytest.approx((0.25, 0.5))


def test_gen_eig_whitening_oracle():
    rng = np.random.default_rng(1)
    G = rng.standard_normal((6, 3))
    A = G @ G.T
    R = rng.standard_normal((6, 6))
    B = R @ R.T + np.eye(6)
    w = np.linalg.eigvals(np.linalg.solve(B, A)).real
    lo, hi = gen_eig_extremes(A, B)
    assert lo == pytest.approx(w.min(), abs=1e-10)
    assert hi == pytest.approx(w.max(), rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_gen_eig_rayleigh_bounds(seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((5, 5))
    A = G @ G.T
    R = rng.standard_normal((5, 5))
    B = R @ R.T + 0.1 * np.eye(5)
    lo, hi = gen_eig_extremes(A, B)
    for x in rng.standard_normal((20, 5)):
        q = x @ A @ x / (x @ B @ x)
        assert lo - 1e-9 * abs(hi) <= q <= hi * (1 + 1e-9)


def test_gen_eig_not_pd():
    with pytest.raises(NotPositiveDefiniteError):
        gen_eig_extremes(np.eye(2), np.diag([1.0, 0.0]))


def test_regularize_makes_pd():
    B = regularize(np.diag([2.0, 0.0]))
    assert B[1, 1] == pytest.approx(1e-10)


def test_pinv_trivial():
    np.testing.assert_allclose(pinv_psd(np.diag([2.0, 0.0]), 1e-12), np.diag([0.5, 0.0]))
    np.testing.assert_allclose(pinv_psd(np.eye(3)), np.eye(3))


def test_pinv_penrose_conditions():
    G = np.random.default_rng(2).standard_normal((4, 2))
    A = G @ G.T
    P = pinv_psd(A)
    np.testing.assert_allclose(A @ P @ A, A, atol=1e-9)
    np.testing.assert_allclose(P @ A @ P, P, atol=1e-9)
    np.testing.assert_allclose((A @ P).T, A @ P, atol=1e-9)
    np.testing.assert_allclose((P @ A).T, P @ A, atol=1e-9)


def test_pinv_involution_full_rank():
    R = np.random.default_rng(3).standard_normal((5, 5))
    A = R @ R.T + np.eye(5)
    np.testing.assert_allclose(pinv_psd(pinv_psd(A)), A, rtol=1e-9)


def test_centered_basis():
    B = centered_basis(7)
    np.testing.assert_allclose(B.T @ B, np.eye(6), atol=1e-12)
    np.testing.assert_allclose(B.sum(axis=0), 0, atol=1e-12)
