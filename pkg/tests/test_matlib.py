import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ilms.errors import ConvergenceError, SingularMatrixError, ValidationError
from ilms import matlib
from ilms.matlib import jacobi_eig, solve_linear, toeplitz_ar1


def test_identity_decomposition():
    w, v = jacobi_eig(np.eye(4))
    np.testing.assert_array_equal(w, np.ones(4))
    np.testing.assert_array_equal(v, np.eye(4))


def test_two_by_two_toeplitz():
    w, _ = jacobi_eig([[1.0, 0.4], [0.4, 1.0]])
    np.testing.assert_allclose(w, [1.4, 0.6], atol=1e-14)


def test_random_symmetric_reconstruction(rng):
    a = rng.standard_normal((4, 4))
    a = a + a.T
    w, v = jacobi_eig(a)
    assert np.max(np.abs(v @ np.diag(w) @ v.T - a)) < 1e-10
    assert np.all(np.diff(w) <= 0)
    # independent check of the spectrum
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a)[::-1], atol=1e-12)


def test_rejects_bad_input():
    with pytest.raises(ValidationError):
        jacobi_eig(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        jacobi_eig([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValidationError):
        jacobi_eig([[1.0, np.nan], [np.nan, 1.0]])
    with pytest.raises(ValidationError):
        jacobi_eig(np.eye(2), tol=0)


def test_sweep_budget_exhaustion(monkeypatch, rng):
    monkeypatch.setattr(matlib, "MAX_JACOBI_SWEEPS", 0)
    a = rng.standard_normal((3, 3))
    with pytest.raises(ConvergenceError):
        jacobi_eig(a + a.T)


symmetric = st.integers(1, 8).flatmap(
    lambda m: st.lists(st.floats(-10, 10), min_size=m * m, max_size=m * m).map(
        lambda xs: np.array(xs).reshape(m, m)
    )
)


@settings(max_examples=60, deadline=None)
@given(symmetric)
def test_orthonormal_eigenvectors(a):
    a = a + a.T
    w, v = jacobi_eig(a)
    assert np.max(np.abs(v.T @ v - np.eye(len(w)))) < 1e-10
    scale = max(1.0, np.linalg.norm(a))
    assert np.max(np.abs(v @ np.diag(w) @ v.T - a)) < 1e-10 * scale


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.floats(-0.95, 0.95))
def test_spd_has_positive_spectrum_and_trace(m, a):
    w, _ = jacobi_eig(toeplitz_ar1(m, a))
    assert np.all(w > 0)
    assert abs(w.sum() - m) < 1e-10


def test_toeplitz_examples():
    np.testing.assert_array_equal(toeplitz_ar1(4, 0), np.eye(4))
    np.testing.assert_array_equal(toeplitz_ar1(2, 0.4), [[1, 0.4], [0.4, 1]])
    t = toeplitz_ar1(3, 0.4)
    assert t[0, 2] == pytest.approx(0.16) and t[2, 0] == pytest.approx(0.16)


@pytest.mark.parametrize("a", [1.0, -1.0, 1.5])
def test_toeplitz_rejects_unit_correlation(a):
    with pytest.raises(ValidationError):
        toeplitz_ar1(3, a)


def test_solve_examples():
    np.testing.assert_array_equal(solve_linear(np.eye(2), [3, 5]), [3, 5])
    np.testing.assert_array_equal(solve_linear([[2, 0], [0, 4]], [2, 8]), [1, 2])


def test_solve_residual(rng):
    a = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    b = rng.standard_normal(4)
    x = solve_linear(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_solve_recovers_x(m, seed):
    r = np.random.default_rng(seed)
    a = r.standard_normal((m, m)) + m * np.eye(m)
    x = r.standard_normal(m)
    got = solve_linear(a, a @ x)
    assert np.linalg.norm(got - x) <= 1e-9 * max(np.linalg.norm(x), 1e-300)


def test_solve_singular():
    with pytest.raises(SingularMatrixError):
        solve_linear([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])
    with pytest.raises(SingularMatrixError):
        solve_linear(np.zeros((3, 3)), np.ones(3))
