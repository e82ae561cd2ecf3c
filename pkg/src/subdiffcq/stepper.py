"""IDm-BDFk time stepping for ``d^alpha (u - v) - A u = g``.

With ``V = u - v`` the smoothed scheme solves, for ``n = 1..N``,

    tau^-alpha sum_{j=0}^{n} w_j V^{n-j} - A V^n
        = tau^-m sum_{j=0}^{min(n, k m)} z_j ( t_{n-j}^m / m! A v + G^{n-j} q ),

where ``w`` are the BDFk weights of order ``alpha``, ``z`` those of the
integer power ``m`` and ``G = J^m g_t``.  ``m = 0`` selects the plain BDFk
convolution quadrature with the source sampled at ``t_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import mp
from .cq_weights import bdf_poly, frac_power_weights, int_power_weights
from .errors import ConfigError, ShapeError
from .linalg import LUFactors, lu_factor, lu_solve
from .smoothing import (DEFAULT_QUAD_N, SourceSpec, build_smoothed_table, evaluate_source,
                        spatial_vector, time_grid)
from .spatial import SpatialOperator, discrete_l2_norm

NO_SOURCE = SourceSpec()


@dataclass(frozen=True)
class SchemeConfig:
    alpha: float
    k: int
    m: int
    N: int
    T: float = 1
    prec: int = mp.DEFAULT_PREC
    M: int = 32
    quad_n: int = DEFAULT_QUAD_N

    def __post_init__(self):
        if not 0 < float(self.alpha) < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (isinstance(self.k, (int, np.integer)) and 1 <= self.k <= 6):
            raise ConfigError(f"k must be an integer in 1..6, got {self.k!r}")
        if not (isinstance(self.m, (int, np.integer)) and 0 <= self.m <= self.k):
            raise ConfigError(f"m must be an integer in 0..k={self.k}, got {self.m!r}")
        if not isinstance(self.N, (int, np.integer)) or self.N < self.k:
            raise ConfigError(f"N must be an integer >= k={self.k}, got {self.N!r}")
        if float(self.T) <= 0:
            raise ConfigError(f"T must be positive, got {self.T}")

    @property
    def tau(self):
        with mp.working_precision(self.prec):
            return mp.mpf(self.T) / self.N


@dataclass(frozen=True)
class Trajectory:
    """Nodal history of a march.  ``V[n] = u[n] - v`` at interior nodes."""

    config: SchemeConfig
    u: np.ndarray
    V: np.ndarray
    op: SpatialOperator = field(repr=False)
    v: np.ndarray = field(repr=False)
    Av: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    source_table: np.ndarray = field(repr=False)
    alpha_weights: np.ndarray = field(repr=False)
    m_weights: np.ndarray | None = field(repr=False)
    step_residuals: tuple = field(default=(), repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.u[-1]

    @property
    def max_residual(self):
        return max(self.step_residuals) if self.step_residuals else mp.mpfr(0)


def _as_vector(v, op: SpatialOperator) -> np.ndarray:
    with mp.working_precision(op.prec):
        if v is None:
            return mp.zeros(op.size)
        out = mp.array(np.asarray(v, dtype=object).ravel())
    if out.shape != (op.size,):
        raise ShapeError(f"initial data has shape {out.shape}, expected ({op.size},)")
    return out


def _system_matrix(op: SpatialOperator, diag):
    S = -np.array(op.A_interior, dtype=object)
    for i in range(op.size):
        S[i, i] += diag
    return S


def _source_coefficients(config: SchemeConfig, m_weights, source_table):
    """Scalar multipliers ``a_n`` of ``A v`` and ``b_n`` of ``q`` in the right-hand side."""
    N, m = config.N, config.m
    tau_m = config.tau ** m
    support = min(N, len(m_weights) - 1)
    # t_n^m / (m! tau^m) = n^m / m!
    powers = [mp.mpfr(n) ** m / factorial(m) for n in range(N + 1)]
    a = mp.zeros(N + 1)
    b = mp.zeros(N + 1)
    for n in range(1, N + 1):
        top = min(n, support)
        acc_a = mp.mpfr(0)
        acc_b = mp.mpfr(0)
        for j in range(top + 1):
            acc_a += m_weights[j] * powers[n - j]
            acc_b += m_weights[j] * source_table[n - j]
        a[n] = acc_a
        b[n] = acc_b / tau_m
    return a, b


def _march(config: SchemeConfig, op: SpatialOperator, v, spec: SourceSpec) -> Trajectory:
    prec = config.prec
    N = config.N
    spec = NO_SOURCE if spec is None else spec
    v = _as_vector(v, op)
    poly = bdf_poly(config.k, prec)
    alpha_w = frac_power_weights(poly, config.alpha, N, prec).weights
    with mp.working_precision(prec):
        tau = config.tau
        tau_alpha = tau ** (-mp.mpf(config.alpha))
        Av = np.dot(op.A_interior, v)
        q = spatial_vector(spec, op.interior_points, prec)
        if config.m >= 1:
            m_w = int_power_weights(poly, config.m, N, prec).weights
            if spec.is_zero:
                table = mp.zeros(N + 1)
            else:
                table = build_smoothed_table(spec, config.m, N, config.T,
                                             config.quad_n, prec).values
            a, b = _source_coefficients(config, m_w, table)
        else:
            m_w = None
            times = time_grid(N, config.T, prec)
            table = mp.zeros(N + 1)
            for n in range(1, N + 1):
                table[n] = evaluate_source(spec, times[n], config.quad_n, prec)
            a = mp.zeros(N + 1)
            a[1:] = mp.mpfr(1)
            b = table.copy()

        factors: LUFactors = lu_factor(_system_matrix(op, alpha_w[0] * tau_alpha))
        V = mp.zeros((N + 1, op.size))
        residuals = []
        for n in range(1, N + 1):
            hist = np.dot(alpha_w[1:n + 1], V[n - 1::-1])
            rhs = a[n] * Av + b[n] * q
            Vn = lu_solve(factors, rhs - tau_alpha * hist)
            V[n] = Vn
            defect = tau_alpha * (alpha_w[0] * Vn + hist) - np.dot(op.A_interior, Vn) - rhs
            residuals.append(discrete_l2_norm(defect, op))
        u = V + v
    return Trajectory(config, mp.frozen(u), mp.frozen(V), op, v, Av, q,
                      mp.frozen(table), alpha_w, m_w, tuple(residuals))


def march(config: SchemeConfig, op: SpatialOperator, v=None,
          spec: SourceSpec | None = None) -> Trajectory:
    """Run the IDm-BDFk scheme (``config.m >= 1``) on ``t_n = n T / N``."""
    if config.m < 1:
        raise ConfigError("march() needs m >= 1; use march_baseline() for m = 0")
    return _march(config, op, v, spec)


def march_baseline(config: SchemeConfig, op: SpatialOperator, v=None,
                   spec: SourceSpec | None = None) -> Trajectory:
    """Unsmoothed BDFk convolution quadrature: ``d^alpha V^n - A V^n = A v + g(t_n)``."""
    if config.m != 0:
        raise ConfigError(f"march_baseline() needs m = 0, got m={config.m}")
    return _march(config, op, v, spec)


def run(config: SchemeConfig, op: SpatialOperator, v=None,
        spec: SourceSpec | None = None) -> Trajectory:
    """Dispatch on ``config.m``."""
    return _march(config, op, v, spec)


def residual(trajectory: Trajectory, n: int):
    """Norm of LHS - RHS of step ``n``, recomputed from the stored history."""
    cfg = trajectory.config
    if not 1 <= n <= cfg.N:
        raise ValueError(f"step index must lie in 1..{cfg.N}, got {n}")
    op = trajectory.op
    V = trajectory.V
    with mp.working_precision(cfg.prec):
        tau = cfg.tau
        w = trajectory.alpha_weights
        lhs = tau ** (-mp.mpf(cfg.alpha)) * np.dot(w[:n + 1], V[n::-1]) - np.dot(op.A_interior, V[n])
        if cfg.m == 0:
            rhs = trajectory.Av + trajectory.source_table[n] * trajectory.q
        else:
            z = trajectory.m_weights
            rhs = mp.zeros(op.size)
            for j in range(min(n, len(z) - 1) + 1):
                if z[j] == 0:
                    continue
                t_pow = (tau * (n - j)) ** cfg.m / factorial(cfg.m)
                rhs = rhs + z[j] * (t_pow * trajectory.Av + trajectory.source_table[n - j] * trajectory.q)
            rhs = rhs / tau ** cfg.m
        return discrete_l2_norm(lhs - rhs, op)
