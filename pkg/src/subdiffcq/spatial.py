"""Chebyshev-Gauss-Lobatto collocation of the Dirichlet Laplacian on (-1, 1)."""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import numpy as np

from . import mp
from .errors import InvalidResolutionError, ShapeError

DEFAULT_M = 32


@dataclass(frozen=True)
class SpatialOperator:
    """Collocation data on the nodes ``x_j = cos(j pi / M)``, ``j = 0..M``.

    ``A_interior`` is the interior block of ``D @ D``; boundary values are
    eliminated by the homogeneous Dirichlet condition.  ``norm_weights`` are
    the Clenshaw-Curtis weights of the interior nodes.
    """

    M: int
    points: np.ndarray
    D: np.ndarray | None
    A_interior: np.ndarray
    norm_weights: np.ndarray
    prec: int = mp.DEFAULT_PREC

    @property
    def interior_points(self) -> np.ndarray:
        return self.points[1:-1]

    @property
    def size(self) -> int:
        return self.A_interior.shape[0]

    def apply(self, vec) -> np.ndarray:
        with mp.working_precision(self.prec):
            return np.dot(self.A_interior, np.asarray(vec, dtype=object))


def chebyshev_points(M: int, prec: int = mp.DEFAULT_PREC) -> np.ndarray:
    with mp.working_precision(prec):
        pi = mp.pi()
        return mp.array([gmpy2.cos(pi * j / M) for j in range(M + 1)])


def chebyshev_diff_matrix(M: int, prec: int = mp.DEFAULT_PREC) -> np.ndarray:
    """First-derivative collocation matrix with the negative-sum diagonal."""
    with mp.working_precision(prec):
        pi = mp.pi()
        c = [mp.mpfr(2 if j in (0, M) else 1) * (-1) ** j for j in range(M + 1)]
        D = mp.zeros((M + 1, M + 1))
        for i in range(M + 1):
            for j in range(M + 1):
                if i != j:
                    # x_i - x_j through a product of sines avoids cancellation
                    diff = -2 * gmpy2.sin(pi * (i + j) / (2 * M)) * gmpy2.sin(pi * (i - j) / (2 * M))
                    D[i, j] = c[i] / (c[j] * diff)
        for i in range(M + 1):
            D[i, i] = -sum((D[i, j] for j in range(M + 1) if j != i), mp.mpfr(0))
    return D


def clenshaw_curtis_weights(M: int, prec: int = mp.DEFAULT_PREC) -> np.ndarray:
    with mp.working_precision(prec):
        pi = mp.pi()
        w = mp.zeros(M + 1)
        theta = [pi * j / M for j in range(M + 1)]
        v = [mp.mpfr(1)] * (M - 1)
        if M % 2 == 0:
            w[0] = w[M] = mp.mpfr(1) / (M * M - 1)
            for k in range(1, M // 2):
                for i in range(M - 1):
                    v[i] -= 2 * gmpy2.cos(2 * k * theta[i + 1]) / (4 * k * k - 1)
            for i in range(M - 1):
                v[i] -= gmpy2.cos(M * theta[i + 1]) / (M * M - 1)
        else:
            w[0] = w[M] = mp.mpfr(1) / (M * M)
            for k in range(1, (M - 1) // 2 + 1):
                for i in range(M - 1):
                    v[i] -= 2 * gmpy2.cos(2 * k * theta[i + 1]) / (4 * k * k - 1)
        for i in range(M - 1):
            w[i + 1] = 2 * v[i] / M
    return w


def build_spatial(M: int = DEFAULT_M, prec: int = mp.DEFAULT_PREC) -> SpatialOperator:
    if not isinstance(M, (int, np.integer)) or M < 4:
        raise InvalidResolutionError(f"polynomial degree M must be an integer >= 4, got {M!r}")
    M = int(M)
    points = chebyshev_points(M, prec)
    D = chebyshev_diff_matrix(M, prec)
    with mp.working_precision(prec):
        D2 = np.dot(D, D)
        A = np.array(D2[1:M, 1:M], dtype=object)
    weights = clenshaw_curtis_weights(M, prec)[1:M].copy()
    return SpatialOperator(M, mp.frozen(points), mp.frozen(D), mp.frozen(A),
                           mp.frozen(weights), prec)


def scalar_operator(lam=1, prec: int = mp.DEFAULT_PREC) -> SpatialOperator:
    """One-node stand-in with ``A = -lam``, for the scalar (ODE) sanity model."""
    with mp.working_precision(prec):
        A = mp.zeros((1, 1))
        A[0, 0] = -mp.mpf(lam)
        points = mp.array([1, 0, -1])
        weights = mp.array([1])
    return SpatialOperator(2, mp.frozen(points), None, mp.frozen(A), mp.frozen(weights), prec)


def discrete_l2_norm(vec, op: SpatialOperator):
    """``sqrt(sum_j w_j v_j**2)`` with the operator's interior weights."""
    vec = np.asarray(vec, dtype=object)
    if vec.shape != (op.size,):
        raise ShapeError(f"vector has shape {vec.shape}, expected ({op.size},)")
    with mp.working_precision(op.prec):
        total = mp.mpfr(0)
        for w, x in zip(op.norm_weights, vec):
            total += w * x * x
        return gmpy2.sqrt(total)


def sample(func, op: SpatialOperator) -> np.ndarray:
    """Evaluate ``func`` at the interior nodes."""
    with mp.working_precision(op.prec):
        return mp.array([func(x) for x in op.interior_points])
