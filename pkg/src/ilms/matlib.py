"""Dense real linear algebra for the small M x M matrices used by the analysis.

Matrices and vectors are plain ``float64`` numpy arrays; the helpers here only
validate shapes and finiteness and implement the few factorizations the
theory needs (Jacobi eigendecomposition and a pivoted linear solve).
"""

import numpy as np

from .errors import ConvergenceError, SingularMatrixError, ValidationError

MAX_JACOBI_SWEEPS = 100
PIVOT_THRESHOLD = 1e-12


def as_matrix(a, name="matrix"):
    """Return `a` as a finite 2-D float64 array or raise ValidationError."""
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def as_vector(v, name="vector"):
    """Return `v` as a finite 1-D float64 array or raise ValidationError."""
    arr = np.array(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def _off_norm(a):
    return np.linalg.norm(a - np.diag(np.diag(a)))


def jacobi_eig(a, tol=1e-12):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    a : array_like, shape (m, m)
        Symmetric matrix.
    tol : float
        Symmetry tolerance and convergence threshold on the off-diagonal
        Frobenius norm (scaled by ``max(1, ||a||_F)``).

    Returns
    -------
    eigenvalues : ndarray, shape (m,)
        Sorted in descending order.
    eigenvectors : ndarray, shape (m, m)
        Orthonormal columns; ``a = V diag(w) V^T``.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    a = as_matrix(a)
    m, n = a.shape
    if m != n:
        raise ValidationError(f"matrix must be square, got {a.shape}")
    if np.max(np.abs(a - a.T), initial=0.0) > tol:
        raise ValidationError("matrix is not symmetric within tolerance")

    d = 0.5 * (a + a.T)
    v = np.eye(m)
    threshold = tol * max(1.0, np.linalg.norm(d))

    sweeps = 0
    while _off_norm(d) > threshold:
        if sweeps == MAX_JACOBI_SWEEPS:
            raise ConvergenceError(
                f"Jacobi iteration did not converge in {MAX_JACOBI_SWEEPS} sweeps"
            )
        sweeps += 1
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = d[p, q]
                if apq == 0.0:
                    continue
                tau = (d[q, q] - d[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # d <- J^T d J with J the (p, q) plane rotation
                dp, dq = d[:, p].copy(), d[:, q].copy()
                d[:, p] = c * dp - s * dq
                d[:, q] = s * dp + c * dq
                rp, rq = d[p, :].copy(), d[q, :].copy()
                d[p, :] = c * rp - s * rq
                d[q, :] = s * rp + c * rq
                d[p, q] = d[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    w = np.diag(d).copy()
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    # deterministic sign: largest-magnitude entry of each column positive
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(m)])
    signs[signs == 0] = 1.0
    return w, v * signs


def toeplitz_ar1(m, a):
    """Covariance of a unit-variance AR(1) process: entry (i, j) = a**|i - j|."""
    if m < 1:
        raise ValidationError("m must be >= 1")
    if not abs(a) < 1:
        raise ValidationError(f"correlation must satisfy |a| < 1, got {a}")
    lags = np.abs(np.subtract.outer(np.arange(m), np.arange(m)))
    return np.power(float(a), lags)


def solve_linear(a, b):
    """Solve ``a x = b`` by Gaussian elimination with partial pivoting.

    Raises SingularMatrixError when a pivot magnitude falls below
    ``PIVOT_THRESHOLD``.
    """
    a = as_matrix(a)
    b = as_vector(b)
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValidationError(f"matrix must be square, got {a.shape}")
    if b.shape != (m,):
        raise ValidationError(f"rhs length {b.shape[0]} does not match {m}")

    lu = a.copy()
    x = b.copy()
    for col in range(m):
        piv = col + int(np.argmax(np.abs(lu[col:, col])))
        if abs(lu[piv, col]) < PIVOT_THRESHOLD:
            raise SingularMatrixError(
                f"pivot {lu[piv, col]:.3e} below threshold at column {col}"
            )
        if piv != col:
            lu[[col, piv]] = lu[[piv, col]]
            x[[col, piv]] = x[[piv, col]]
        factors = lu[col + 1:, col] / lu[col, col]
        lu[col + 1:, col:] -= np.outer(factors, lu[col, col:])
        x[col + 1:] -= factors * x[col]
    for row in range(m - 1, -1, -1):
        x[row] = (x[row] - lu[row, row + 1:] @ x[row + 1:]) / lu[row, row]
    return x
