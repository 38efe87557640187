"""Dense kernels for small symmetric matrices.

Everything here works on plain ``numpy.ndarray`` objects. Symmetric inputs
are validated by :func:`as_symmetric`, which also forces exact symmetry of
the stored entries, so downstream code can rely on ``M[i, j] == M[j, i]``.

The eigensolver is a cyclic Jacobi method. It is slow compared to LAPACK
but unconditionally robust for the dimensions we care about (n <= 32) and
fully deterministic.
"""

from typing import NamedTuple

import numpy as np

from .errors import NotPositiveDefinite, NumericalFailure

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
PD_TOL = 1e-12
PINV_RANK_TOL = 1e-10
RANK_TOL = 1e-12

__all__ = [
    "EigenDecomposition",
    "as_matrix",
    "as_symmetric",
    "sym_eigen",
    "cholesky",
    "is_positive_definite",
    "solve_spd",
    "inverse_spd",
    "pinv_psd",
    "sym_sqrt_inv",
    "spectral_norm",
    "column_rank",
    "lambda_min",
    "lambda_max",
]


class EigenDecomposition(NamedTuple):
    """Eigenvalues (ascending) and orthonormal eigenvectors (as columns)."""

    values: np.ndarray
    vectors: np.ndarray


def as_matrix(M, name="matrix"):
    """Return `M` as a finite 2D float array, raising ``ValueError`` otherwise."""
    arr = np.array(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_symmetric(M, name="matrix", rtol=1e-10):
    """Validate a square, (numerically) symmetric matrix and symmetrize it.

    The returned array is exactly symmetric: ``(M + M.T) / 2``.
    """
    arr = as_matrix(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    scale = max(1.0, float(np.max(np.abs(arr))))
    if np.max(np.abs(arr - arr.T)) > rtol * scale:
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (arr + arr.T)


def _off_norm(a):
    off = a - np.diag(np.diag(a))
    return np.sqrt(np.sum(off * off))


def sym_eigen(M, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    M : (n, n) array_like
        Symmetric matrix.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        ``tol * ||M||_F``.
    max_sweeps : int
        Iteration cap.

    Returns
    -------
    EigenDecomposition
        ``values`` sorted ascending, ``vectors`` orthogonal with the
        matching eigenvectors as columns.

    Raises
    ------
    NumericalFailure
        If the off-diagonal mass is still above threshold after `max_sweeps`.
    """
    a = as_symmetric(M)
    n = a.shape[0]
    v = np.eye(n)
    threshold = tol * np.linalg.norm(a)

    for _ in range(max_sweeps):
        if _off_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < abs(diff) * 1e-36:
                    # theta would overflow; t ~ 1 / (2 theta)
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if _off_norm(a) > threshold:
            raise NumericalFailure(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps"
            )

    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], v[:, order])


def lambda_min(M):
    return sym_eigen(M).values[0]


def lambda_max(M):
    return sym_eigen(M).values[-1]


def cholesky(M, tol=PD_TOL):
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == M``.

    A pivot at or below ``tol * trace(M) / n`` is treated as a failure,
    which makes this the package's positive-definiteness test.

    Raises
    ------
    NotPositiveDefinite
    """
    a = as_symmetric(M)
    n = a.shape[0]
    trace = np.trace(a)
    if not trace > 0.0:
        raise NotPositiveDefinite("matrix has non-positive trace")
    floor = tol * trace / n
    L = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= floor:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} at column {j} below {floor:.3e}")
        L[j, j] = np.sqrt(pivot)
        for i in range(j + 1, n):
            L[i, j] = (a[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


def is_positive_definite(M, tol=PD_TOL):
    try:
        cholesky(M, tol)
    except NotPositiveDefinite:
        return False
    return True


def _cho_solve(L, rhs):
    n = L.shape[0]
    y = np.zeros_like(rhs)
    for i in range(n):
        y[i] = (rhs[i] - L[i, :i] @ y[:i]) / L[i, i]
    x = np.zeros_like(rhs)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x


def solve_spd(M, rhs):
    """Solve ``M X = rhs`` for symmetric positive definite `M` via Cholesky."""
    L = cholesky(M)
    rhs = np.array(rhs, dtype=float)
    vector = rhs.ndim == 1
    x = _cho_solve(L, rhs.reshape(L.shape[0], -1))
    return x.ravel() if vector else x


def inverse_spd(M):
    """Inverse of a symmetric positive definite matrix (exactly symmetric)."""
    n = np.shape(M)[0]
    inv = solve_spd(M, np.eye(n))
    return 0.5 * (inv + inv.T)


def pinv_psd(M, rank_tol=PINV_RANK_TOL):
    """Moore-Penrose inverse of a symmetric positive semidefinite matrix.

    Eigenvalues at or below ``rank_tol * lambda_max`` are treated as zero.
    """
    values, vectors = sym_eigen(M)
    top = values[-1]
    if not top > 0.0:
        return np.zeros_like(vectors)
    keep = values > rank_tol * top
    V = vectors[:, keep]
    out = (V / values[keep]) @ V.T
    return 0.5 * (out + out.T)


def sym_sqrt_inv(M, tol=PD_TOL):
    """Inverse symmetric square root ``M^{-1/2}`` of a positive definite matrix."""
    values, vectors = sym_eigen(M)
    n = len(values)
    if not values[0] > tol * np.sum(values) / n:
        raise NotPositiveDefinite(f"lambda_min = {values[0]:.3e}")
    out = (vectors / np.sqrt(values)) @ vectors.T
    return 0.5 * (out + out.T)


def spectral_norm(M):
    """Largest singular value, computed as ``sqrt(lambda_max(M^T M))``."""
    M = as_matrix(M)
    return float(np.sqrt(max(0.0, lambda_max(M.T @ M))))


def column_rank(M, tol=RANK_TOL):
    """Numerical column rank from the eigenvalues of ``M^T M``.

    Eigenvalues above ``tol * lambda_max(M^T M)`` count toward the rank.
    """
    M = as_matrix(M)
    values = sym_eigen(M.T @ M).values
    top = values[-1]
    if not top > 0.0:
        return 0
    return int(np.sum(values > tol * top))
