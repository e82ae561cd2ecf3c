"""Dense LU with partial pivoting for object arrays of mpfr or mpc entries."""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import numpy as np

from .errors import LinearSolverError, ShapeError
from .mp import max_abs


@dataclass(frozen=True)
class LUFactors:
    lu: np.ndarray
    piv: np.ndarray

    @property
    def n(self) -> int:
        return self.lu.shape[0]


def lu_factor(a: np.ndarray) -> LUFactors:
    """Factor ``P a = L U`` at the current working precision.

    Raises :class:`LinearSolverError` when a pivot is zero or negligible
    relative to the matrix scale.
    """
    a = np.array(a, dtype=object, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    piv = np.arange(n)
    scale = max_abs(a)
    if scale == 0:
        raise LinearSolverError("matrix is identically zero")
    tiny = scale * n * gmpy2.mpfr(2) ** (-gmpy2.get_context().precision)
    for k in range(n):
        col = [abs(x) for x in a[k:, k]]
        p = k + max(range(n - k), key=col.__getitem__)
        if col[p - k] <= tiny:
            raise LinearSolverError(f"matrix is numerically singular at column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        if k + 1 < n:
            a[k + 1:, k] = a[k + 1:, k] / a[k, k]
            a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return LUFactors(a, piv)


def lu_solve(factors: LUFactors, b: np.ndarray) -> np.ndarray:
    lu, n = factors.lu, factors.n
    b = np.asarray(b, dtype=object)
    if b.shape != (n,):
        raise ShapeError(f"right-hand side has shape {b.shape}, expected ({n},)")
    x = b[factors.piv].copy()
    for i in range(1, n):
        x[i] = x[i] - np.dot(lu[i, :i], x[:i])
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[i] = (x[i] - np.dot(lu[i, i + 1:], x[i + 1:])) / lu[i, i]
        else:
            x[i] = x[i] / lu[i, i]
    return x


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return lu_solve(lu_factor(a), b)


def hessenberg(a: np.ndarray):
    """Orthogonal reduction ``a = Q H Q^T`` with ``H`` upper Hessenberg (Householder)."""
    h = np.array(a, dtype=object, copy=True)
    n = h.shape[0]
    q = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            q[i, j] = gmpy2.mpfr(1 if i == j else 0)
    for k in range(n - 2):
        x = h[k + 1:, k]
        norm = gmpy2.sqrt(np.dot(x, x))
        if norm == 0:
            continue
        alpha = -norm if x[0] >= 0 else norm
        v = x.copy()
        v[0] = v[0] - alpha
        vv = np.dot(v, v)
        if vv == 0:
            continue
        beta = 2 / vv
        h[k + 1:, :] -= np.outer(v, beta * np.dot(v, h[k + 1:, :]))
        h[:, k + 1:] -= np.outer(np.dot(h[:, k + 1:], v), beta * v)
        q[:, k + 1:] -= np.outer(np.dot(q[:, k + 1:], v), beta * v)
        h[k + 2:, k] = gmpy2.mpfr(0)
    return h, q


def solve_hessenberg(h: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``h x = b`` for upper Hessenberg ``h`` with adjacent-row pivoting."""
    a = np.array(h, dtype=object, copy=True)
    x = np.array(b, dtype=object, copy=True)
    n = a.shape[0]
    for k in range(n - 1):
        if abs(a[k + 1, k]) > abs(a[k, k]):
            a[[k, k + 1], k:] = a[[k + 1, k], k:]
            x[[k, k + 1]] = x[[k + 1, k]]
        if a[k, k] == 0:
            raise LinearSolverError(f"Hessenberg system is singular at column {k}")
        factor = a[k + 1, k] / a[k, k]
        a[k + 1, k:] -= factor * a[k, k:]
        x[k + 1] = x[k + 1] - factor * x[k]
    if a[n - 1, n - 1] == 0:
        raise LinearSolverError("Hessenberg system is singular")
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[i] = (x[i] - np.dot(a[i, i + 1:], x[i + 1:])) / a[i, i]
        else:
            x[i] = x[i] / a[i, i]
    return x
