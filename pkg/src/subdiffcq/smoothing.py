"""Separable singular sources and their m-fold integrals ``G = J^m g``.

A source is ``g(x, t) = g_t(t) * q(x)``.  The time factor is a finite sum of
terms ``c * t**mu`` combined with an optional smooth factor ``f`` either by
product (``c t**mu f(t)``) or by convolution (``c (t**mu * f)(t)``).  Pure
power terms integrate in closed form; the others go through Gauss-Jacobi
rules whose weight function absorbs the endpoint singularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import gmpy2
import numpy as np

from . import mp
from .errors import AccuracyError, ConfigError, InvalidWeightError

MODES = ("none", "pure_power", "product", "convolution")
DEFAULT_QUAD_N = 64


@dataclass(frozen=True)
class TimeKernelTerm:
    coefficient: object = 1
    exponent: object = 0
    smooth_factor: Callable | None = None

    def __post_init__(self):
        if float(self.exponent) <= -1:
            raise ConfigError(f"exponent must exceed -1 for integrability, got {self.exponent}")


@dataclass(frozen=True)
class SourceSpec:
    mode: str = "none"
    time_terms: tuple[TimeKernelTerm, ...] = ()
    spatial_profile: Callable | None = None
    description: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown source mode {self.mode!r}; expected one of {MODES}")
        object.__setattr__(self, "time_terms", tuple(self.time_terms))
        if self.mode == "none" and self.time_terms:
            raise ConfigError("mode 'none' takes no time terms")
        if self.mode != "none" and not self.time_terms:
            raise ConfigError(f"mode {self.mode!r} needs at least one time term")
        if self.mode == "pure_power" and any(t.smooth_factor is not None for t in self.time_terms):
            raise ConfigError("pure_power terms cannot carry a smooth factor")
        if self.mode != "none" and self.spatial_profile is None:
            raise ConfigError("a spatial profile is required for a nonzero source")

    @property
    def is_zero(self) -> bool:
        return self.mode == "none"


@dataclass(frozen=True)
class SmoothedTable:
    """``values[n] = G(t_n)`` on ``t_n = n T / N``; ``values[0]`` is exactly zero."""

    m: int
    values: np.ndarray
    quadrature_order: int
    T: object = 1
    times: np.ndarray = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return len(self.values) - 1


# -- Gauss-Jacobi rules -----------------------------------------------------

def _jacobi_recurrence(beta, n):
    """Diagonal and off-diagonal of the Jacobi matrix for weight ``(1 + s)**beta``."""
    a = mp.mpfr(0)
    b = beta
    diag = []
    for k in range(n):
        s = 2 * k + a + b
        if k == 0:
            diag.append((b - a) / (a + b + 2))
        else:
            diag.append((b * b - a * a) / (s * (s + 2)))
    off = []
    for k in range(1, n):
        s = 2 * k + a + b
        num = 4 * k * (k + a) * (k + b) * (k + a + b)
        den = s * s * (s + 1) * (s - 1)
        off.append(gmpy2.sqrt(num / den))
    return diag, off


def _tridiagonal_ql(d, e, max_iter=60):
    """Eigenvalues of a symmetric tridiagonal matrix and the first components of
    its normalised eigenvectors (implicit QL with Wilkinson-type shifts)."""
    n = len(d)
    d = list(d)
    e = list(e) + [mp.mpfr(0)]
    z = [mp.mpfr(0)] * n
    z[0] = mp.mpfr(1)
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise AccuracyError(f"tridiagonal eigen-iteration did not converge at index {l}")
            g = (d[l + 1] - d[l]) / (2 * e[l])
            r = gmpy2.hypot(g, 1)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0 else -r))
            s = c = mp.mpfr(1)
            p = mp.mpfr(0)
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = gmpy2.hypot(f, g)
                e[i + 1] = r
                if r == 0:
                    d[i + 1] -= p
                    e[m] = mp.mpfr(0)
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = mp.mpfr(0)
    return d, z


@lru_cache(maxsize=64)
def _jacobi_rule_cached(beta_key: str, n: int, prec: int):
    with mp.working_precision(prec + 32):
        beta = mp.mpfr(beta_key)
        diag, off = _jacobi_recurrence(beta, n)
        nodes, first = _tridiagonal_ql(diag, off)
        mu0 = mp.mpfr(2) ** (beta + 1) / (beta + 1)
        pairs = sorted(zip(nodes, (mu0 * v * v for v in first)), key=lambda nw: nw[0])
    with mp.working_precision(prec):
        x = mp.frozen(mp.array([nw[0] for nw in pairs]))
        w = mp.frozen(mp.array([nw[1] for nw in pairs]))
    return x, w


def jacobi_rule(beta, n: int, prec: int = mp.DEFAULT_PREC):
    """``n``-point Gauss-Jacobi rule for ``int_{-1}^{1} (1 + s)**beta P(s) ds``.

    Nodes and weights come from the Golub-Welsch eigenproblem of the Jacobi
    matrix with parameters ``(0, beta)``; exact for polynomials of degree
    ``2n - 1``.
    """
    if float(beta) <= -1:
        raise InvalidWeightError(f"Jacobi exponent must exceed -1, got {beta}")
    if n < 1:
        raise ValueError(f"rule needs at least one node, got {n}")
    with mp.working_precision(prec):
        key = mp.to_decimal(mp.mpf(beta))
    return _jacobi_rule_cached(key, int(n), int(prec))


def gauss_legendre(n: int, prec: int = mp.DEFAULT_PREC):
    return jacobi_rule(0, n, prec)


# -- smoothing operators -----------------------------------------------------

def smooth_pure_power(mu, m: int, t, prec: int = mp.DEFAULT_PREC):
    """``J^m t**mu = Gamma(mu + 1) t**(mu + m) / Gamma(mu + m + 1)``; ``m = 0`` gives ``t**mu``."""
    if float(mu) <= -1:
        raise ConfigError(f"mu must exceed -1, got {mu}")
    if m < 0:
        raise ConfigError(f"m must be non-negative, got {m}")
    with mp.working_precision(prec):
        mu = mp.mpf(mu)
        t = mp.mpf(t)
        if t < 0:
            raise ConfigError(f"t must be non-negative, got {t}")
        if t == 0:
            if m == 0 and mu < 0:
                raise ConfigError("t**mu is unbounded at t = 0 for mu < 0")
            return mp.mpfr(1) if (m == 0 and mu == 0) else mp.mpfr(0)
        return gmpy2.gamma(mu + 1) * t ** (mu + m) / gmpy2.gamma(mu + m + 1)


def _check_tail(full, half, tol, what):
    scale = max(mp.mpfr(1), abs(full))
    if abs(full - half) > tol * scale:
        raise AccuracyError(
            f"{what}: quadrature tail estimate {float(abs(full - half)):.3e} exceeds "
            f"tolerance {float(tol * scale):.3e}; increase quad_n")


def _default_tol(prec):
    return mp.mpfr(10) ** (-(mp.digits(prec) - 20))


def _product_integral(mu, m, t, f, n, prec):
    x, w = jacobi_rule(mu, n, prec)
    half = t / 2
    acc = mp.mpfr(0)
    for xi, wi in zip(x, w):
        acc += wi * (1 - xi) ** (m - 1) * f(half * (1 + xi))
    return acc * half ** (mu + m) / gmpy2.gamma(mp.mpfr(m))


def smooth_product(term: TimeKernelTerm, m: int, t, quad_n: int = DEFAULT_QUAD_N,
                   prec: int = mp.DEFAULT_PREC, tol=None):
    """``c * J^m (t**mu f)`` at ``t`` for ``m >= 1``.

    On ``s = t (1 + y) / 2`` the weight ``(1 + y)**mu`` carries the singularity
    and ``(1 - y)**(m - 1)`` is a polynomial factor of the integrand.
    """
    if m < 1:
        raise ConfigError(f"m must be >= 1 for the product smoothing, got {m}")
    with mp.working_precision(prec):
        c = mp.mpf(term.coefficient)
        mu = mp.mpf(term.exponent)
        t = mp.mpf(t)
        if t < 0:
            raise ConfigError(f"t must be non-negative, got {t}")
        if term.smooth_factor is None:
            return c * smooth_pure_power(mu, m, t, prec)
        if t == 0:
            return mp.mpfr(0)
        full = _product_integral(mu, m, t, term.smooth_factor, quad_n, prec)
        half = _product_integral(mu, m, t, term.smooth_factor, max(quad_n // 2, 1), prec)
        _check_tail(full, half, _default_tol(prec) if tol is None else tol,
                    f"product smoothing at t={float(t):.6g}")
        return c * full


def _convolution_integral(mu, m, t, f, n, prec):
    beta = mu + m
    x, w = jacobi_rule(beta, n, prec)
    half = t / 2
    acc = mp.mpfr(0)
    for xi, wi in zip(x, w):
        acc += wi * f(half * (1 - xi))
    return acc * half ** (beta + 1) * gmpy2.gamma(mu + 1) / gmpy2.gamma(beta + 1)


def smooth_convolution(term: TimeKernelTerm, m: int, t, quad_n: int = DEFAULT_QUAD_N,
                       prec: int = mp.DEFAULT_PREC, tol=None):
    """``c * J^m (t**mu * f)`` at ``t``, i.e.
    ``c Gamma(mu+1)/Gamma(mu+m+1) int_0^t (t-s)**(mu+m) f(s) ds``.

    ``m = 0`` evaluates the unsmoothed convolution itself.
    """
    if m < 0:
        raise ConfigError(f"m must be non-negative, got {m}")
    with mp.working_precision(prec):
        c = mp.mpf(term.coefficient)
        mu = mp.mpf(term.exponent)
        t = mp.mpf(t)
        if t < 0:
            raise ConfigError(f"t must be non-negative, got {t}")
        if term.smooth_factor is None:
            # constant factor 1: one more integral of the power
            return c * smooth_pure_power(mu, m + 1, t, prec)
        if t == 0:
            return mp.mpfr(0)
        full = _convolution_integral(mu, m, t, term.smooth_factor, quad_n, prec)
        half = _convolution_integral(mu, m, t, term.smooth_factor, max(quad_n // 2, 1), prec)
        _check_tail(full, half, _default_tol(prec) if tol is None else tol,
                    f"convolution smoothing at t={float(t):.6g}")
        return c * full


def _smooth_term(spec: SourceSpec, term: TimeKernelTerm, m, t, quad_n, prec):
    if spec.mode == "pure_power":
        return mp.mpf(term.coefficient) * smooth_pure_power(term.exponent, m, t, prec)
    if spec.mode == "product":
        return smooth_product(term, m, t, quad_n, prec)
    return smooth_convolution(term, m, t, quad_n, prec)


def time_grid(N: int, T, prec: int = mp.DEFAULT_PREC) -> np.ndarray:
    with mp.working_precision(prec):
        T = mp.mpf(T)
        return mp.frozen(mp.array([T * n / N for n in range(N + 1)]))


def build_smoothed_table(spec: SourceSpec, m: int, N: int, T=1,
                         quad_n: int = DEFAULT_QUAD_N,
                         prec: int = mp.DEFAULT_PREC) -> SmoothedTable:
    """Tabulate ``G(t_n) = J^m g_t(t_n)`` for ``n = 0..N`` (``G^0 = 0``)."""
    if spec.is_zero:
        raise ConfigError("cannot smooth a source of mode 'none'")
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    times = time_grid(N, T, prec)
    with mp.working_precision(prec):
        values = [mp.mpfr(0)]
        for n in range(1, N + 1):
            try:
                values.append(sum((_smooth_term(spec, term, m, times[n], quad_n, prec)
                                   for term in spec.time_terms), mp.mpfr(0)))
            except AccuracyError as exc:
                raise AccuracyError(f"time node n={n}: {exc}") from exc
        table = mp.frozen(mp.array(values))
    return SmoothedTable(m, table, quad_n, T, times)


def evaluate_source(spec: SourceSpec, t, quad_n: int = DEFAULT_QUAD_N,
                    prec: int = mp.DEFAULT_PREC):
    """Pointwise time factor ``g_t(t)`` for ``t > 0`` (used by the unsmoothed scheme)."""
    if spec.is_zero:
        return mp.mpfr(0)
    with mp.working_precision(prec):
        t = mp.mpf(t)
        total = mp.mpfr(0)
        for term in spec.time_terms:
            c = mp.mpf(term.coefficient)
            mu = mp.mpf(term.exponent)
            if spec.mode == "convolution":
                total += smooth_convolution(term, 0, t, quad_n, prec)
            else:
                f = term.smooth_factor(t) if term.smooth_factor is not None else 1
                total += c * t ** mu * f
        return total


def spatial_vector(spec: SourceSpec, points: Sequence, prec: int = mp.DEFAULT_PREC) -> np.ndarray:
    """Sample the spatial profile at the given nodes (zeros for a null source)."""
    with mp.working_precision(prec):
        if spec.is_zero:
            return mp.zeros(len(points))
        return mp.array([spec.spatial_profile(x) for x in points])
