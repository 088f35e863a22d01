"""Hermitian positive-definite linear algebra.

Every covariance in the package goes through :func:`cholesky`, which adds an
explicit pivot test on top of LAPACK so that nearly singular matrices are
rejected consistently.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite

#: Relative pivot floor; a pivot at or below ``PIVOT_RTOL * max(diag(a))``
#: marks the matrix as degenerate.
PIVOT_RTOL = 1e-14

_HERMITIAN_RTOL = 1e-10


def _as_square(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def cholesky(a) -> np.ndarray:
    """Lower-triangular factor ``L`` with ``L @ L.conj().T == a``.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Hermitian matrix, real or complex.

    Returns
    -------
    numpy.ndarray
        Lower-triangular factor with a real positive diagonal.

    Raises
    ------
    NotPositiveDefinite
        If factorization fails or a squared pivot is at or below
        ``PIVOT_RTOL`` times the largest diagonal entry.
    DimensionMismatch
        If ``a`` is not square.
    """
    a = _as_square(a)
    scale = np.max(np.abs(a))
    if scale > 0 and np.max(np.abs(a - a.conj().T)) > _HERMITIAN_RTOL * scale:
        raise ValueError("matrix is not Hermitian")
    diag = np.real(np.diagonal(a))
    dmax = float(np.max(diag))
    if dmax <= 0.0:
        raise NotPositiveDefinite("non-positive diagonal")
    try:
        factor = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.real(np.diagonal(factor)) ** 2
    if np.any(pivots <= PIVOT_RTOL * dmax):
        k = int(np.argmin(pivots))
        raise NotPositiveDefinite(
            f"pivot {k} = {pivots[k]:.3e} below {PIVOT_RTOL:g} * max diagonal {dmax:.3e}"
        )
    return factor


def _check_rhs(dim: int, b: np.ndarray) -> None:
    if b.ndim not in (1, 2) or b.shape[-1] != dim:
        raise DimensionMismatch(f"right-hand side shape {b.shape} does not match dim {dim}")


def whiten(factor: np.ndarray, y) -> np.ndarray:
    """Return ``L^{-1} y`` for one vector ``(n,)`` or a batch ``(m, n)``."""
    y = np.asarray(y)
    _check_rhs(factor.shape[0], y)
    w = solve_triangular(factor, y.T, lower=True, check_finite=False)
    return w.T


def hermitian_solve(a, b, *, factor: np.ndarray | None = None) -> np.ndarray:
    """Solve ``a x = b`` for Hermitian positive-definite ``a``.

    Parameters
    ----------
    a : array_like, shape (n, n)
    b : array_like, shape (n,) or (m, n)
        One right-hand side, or a batch with one right-hand side per row.
    factor : numpy.ndarray, optional
        Precomputed :func:`cholesky` factor of ``a``.
    """
    if factor is None:
        factor = cholesky(a)
    b = np.asarray(b)
    _check_rhs(factor.shape[0], b)
    w = solve_triangular(factor, b.T, lower=True, check_finite=False)
    x = solve_triangular(factor.conj().T, w, lower=False, check_finite=False)
    return x.T


def quadratic_form(a, y, *, factor: np.ndarray | None = None):
    """Return the real scalar ``y^H a^{-1} y``.

    Computed as ``||L^{-1} y||^2`` so the result is real and non-negative by
    construction. A batch ``(m, n)`` of vectors yields ``m`` values.
    """
    if factor is None:
        factor = cholesky(a)
    w = whiten(factor, y)
    q = np.sum(np.abs(w) ** 2, axis=-1)
    return float(q) if np.ndim(q) == 0 else q


def log_det(a, *, factor: np.ndarray | None = None) -> float:
    """Natural log of ``det(a)`` as ``2 * sum(log(diag(L)))``."""
    if factor is None:
        factor = cholesky(a)
    return float(2.0 * np.sum(np.log(np.real(np.diagonal(factor)))))
