"""Reference solutions independent of the time stepper.

``contour_solution`` evaluates the inverse Laplace transform of the
semi-discrete problem with source ``t**mu q``,

    V(t) = 1/(2 pi i) int_Gamma e^{zt} (z^alpha - A)^{-1} (z^{-1} A v + Gamma(mu+1) z^{-(mu+1)} q) dz,

on the contour made of the arc ``|z| = kappa, |arg z| <= theta`` and the rays
``z = r e^{+-i theta}, r >= kappa``.  Data are real, so only the upper half is
integrated and ``V = Im(I_upper) / pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from . import mp
from .errors import AccuracyError, ConfigError, DomainError
from .linalg import hessenberg, solve_hessenberg
from .smoothing import gauss_legendre
from .spatial import SpatialOperator

DEFAULT_N_RAY = 400
DEFAULT_N_ARC = 100


@dataclass(frozen=True)
class ContourParams:
    theta: float
    kappa: float
    R: float
    n_ray: int = DEFAULT_N_RAY
    n_arc: int = DEFAULT_N_ARC

    def __post_init__(self):
        if not math.pi / 2 < float(self.theta) < math.pi:
            raise ConfigError(f"theta must lie strictly inside (pi/2, pi), got {self.theta}")
        if float(self.kappa) <= 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")
        if float(self.R) <= float(self.kappa):
            raise ConfigError(f"R={self.R} must exceed kappa={self.kappa}")
        if self.n_ray < 1 or self.n_arc < 1:
            raise ConfigError("node counts must be positive")

    @classmethod
    def default(cls, t, prec: int = mp.DEFAULT_PREC, theta=None, kappa=None,
                n_ray: int | None = None, n_arc: int = DEFAULT_N_ARC) -> "ContourParams":
        """``theta = 3 pi / 4``, ``kappa = 1 / t`` and a ray long enough that
        ``exp(R t cos theta)`` falls below ``10**-D`` times ``e**-5``.

        Steeper rays are longer and ``e^{zt}`` oscillates more along them, so
        unless given, ``n_ray`` grows in proportion to ``R`` relative to the
        ``theta = 3 pi / 4`` ray.
        """
        t = float(t)
        theta = 0.75 * math.pi if theta is None else float(theta)
        kappa = 1.0 / t if kappa is None else float(kappa)
        D = mp.digits(prec)
        R = (D * math.log(10) + 5) / (t * abs(math.cos(theta)))
        if n_ray is None:
            ratio = abs(math.cos(0.75 * math.pi)) / abs(math.cos(theta))
            n_ray = math.ceil(DEFAULT_N_RAY * max(1.0, ratio))
        return cls(theta, kappa, max(R, 2 * kappa), n_ray, n_arc)

    def scaled(self, factor: int) -> "ContourParams":
        return ContourParams(self.theta, self.kappa, self.R * factor,
                             self.n_ray * factor, self.n_arc * factor)


def _ray_panels(kappa, R):
    """Geometrically graded breakpoints ``kappa, 2 kappa, 4 kappa, ..., R``."""
    edges = [kappa]
    while edges[-1] * 2 < R:
        edges.append(edges[-1] * 2)
    edges.append(R)
    return edges


def contour_nodes(params: ContourParams, prec: int = mp.DEFAULT_PREC):
    """Quadrature nodes ``z`` and weights ``dz`` on the upper half contour."""
    with mp.working_precision(prec):
        theta = mp.mpf(params.theta)
        kappa = mp.mpf(params.kappa)
        R = mp.mpf(params.R)
        nodes, weights = [], []
        # arc: z = kappa e^{i phi}, phi in [0, theta]
        x, w = gauss_legendre(params.n_arc, prec)
        for xi, wi in zip(x, w):
            phi = theta * (xi + 1) / 2
            z = kappa * gmpy2.mpc(gmpy2.cos(phi), gmpy2.sin(phi))
            nodes.append(z)
            weights.append(1j * z * wi * theta / 2)
        # ray: z = r e^{i theta}, r in [kappa, R], graded panels
        edges = _ray_panels(kappa, R)
        per_panel = max(8, -(-params.n_ray // (len(edges) - 1)))
        x, w = gauss_legendre(per_panel, prec)
        direction = gmpy2.mpc(gmpy2.cos(theta), gmpy2.sin(theta))
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = (hi - lo) / 2
            mid = (hi + lo) / 2
            for xi, wi in zip(x, w):
                nodes.append((mid + half * xi) * direction)
                weights.append(direction * half * wi)
    return nodes, weights


def _resolvent_terms(op, v, alpha, mu, q):
    n = op.size
    v = mp.array(np.asarray(v, dtype=object).ravel()) if v is not None else mp.zeros(n)
    q = mp.array(np.asarray(q, dtype=object).ravel()) if q is not None else mp.zeros(n)
    zero_source = all(x == 0 for x in q)
    if not zero_source and (mu is None or float(mu) <= -1):
        raise ConfigError(f"mu must exceed -1 for a nonzero source, got {mu}")
    return v, q, zero_source


def contour_integral(op: SpatialOperator, v, alpha, mu, q, t,
                     params: ContourParams | None = None, prec: int | None = None,
                     two_sided: bool = False) -> np.ndarray:
    """``V(t)`` as a complex vector.

    By default only the upper half of the contour is integrated and the
    lower half is supplied by conjugate symmetry (imaginary part exactly 0).
    ``two_sided`` integrates both halves explicitly, which exposes any
    asymmetry as a nonzero imaginary part.
    """
    prec = op.prec if prec is None else prec
    if not 0 < float(alpha) < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    if float(t) <= 0:
        raise ConfigError(f"t must be positive, got {t}")
    params = ContourParams.default(t, prec) if params is None else params
    n = op.size
    with mp.working_precision(prec):
        v, q, zero_source = _resolvent_terms(op, v, alpha, mu, q)
        t = mp.mpf(t)
        alpha = mp.mpf(alpha)
        tail = gmpy2.exp(mp.mpf(params.R) * t * gmpy2.cos(mp.mpf(params.theta)))
        tol = mp.mpfr(10) ** (-mp.digits(prec) + 5)
        if tail > tol:
            raise AccuracyError(
                f"contour truncation tail exp(R t cos theta) = {float(tail):.3e} exceeds "
                f"{float(tol):.3e}; increase R")
        Av = np.dot(op.A_interior, v)
        total = np.array([gmpy2.mpc(0)] * n, dtype=object)
        if zero_source and all(x == 0 for x in Av):
            return total
        shift = -(mp.mpf(mu) + 1) if not zero_source else None
        gmu = gmpy2.gamma(mp.mpf(mu) + 1) if not zero_source else None
        # A = Q H Q^T once; each node then needs only a Hessenberg solve
        H, Q = hessenberg(op.A_interior)
        negH = -H
        Qt_Av = np.dot(Q.T, Av)
        Qt_q = np.dot(Q.T, q)
        nodes, weights = contour_nodes(params, prec)
        if two_sided:
            # mirror nodes are traversed in the opposite direction
            pairs = [(z, dz) for z, dz in zip(nodes, weights)]
            pairs += [(z.conjugate(), -dz.conjugate()) for z, dz in zip(nodes, weights)]
        else:
            pairs = list(zip(nodes, weights))
        acc = np.array([gmpy2.mpc(0)] * n, dtype=object)
        for z, dz in pairs:
            S = negH.copy()
            za = z ** alpha
            for i in range(n):
                S[i, i] = S[i, i] + za
            rhs = Qt_Av / z
            if not zero_source:
                rhs = rhs + Qt_q * (gmu * z ** shift)
            acc = acc + solve_hessenberg(S, rhs) * (gmpy2.exp(z * t) * dz)
        total = np.dot(Q, acc)
        if two_sided:
            two_pi_i = gmpy2.mpc(0, 2 * mp.pi())
            return np.array([c / two_pi_i for c in total], dtype=object)
        return np.array([gmpy2.mpc(c.imag / mp.pi(), 0) for c in total], dtype=object)


def contour_solution(op: SpatialOperator, v, alpha, mu, q, t,
                     params: ContourParams | None = None,
                     prec: int | None = None) -> np.ndarray:
    """Semi-discrete solution ``u(t) = v + V(t)`` for the source ``t**mu q``.

    ``mu`` may be ``None`` when ``q`` is zero (no source).
    """
    prec = op.prec if prec is None else prec
    V = contour_integral(op, v, alpha, mu, q, t, params, prec)
    with mp.working_precision(prec):
        v = mp.array(np.asarray(v, dtype=object).ravel()) if v is not None else mp.zeros(op.size)
        return v + np.array([c.real for c in V], dtype=object)


def mittag_leffler(alpha, beta, z, prec: int = mp.DEFAULT_PREC):
    """``E_{alpha,beta}(z) = sum_j z**j / Gamma(alpha j + beta)`` by direct summation.

    Guard bits cover the cancellation of the alternating series for negative
    ``z`` (the largest term is about ``exp(|z|**(1/alpha))``).
    """
    if not 0 < float(alpha) <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    zf = abs(float(z))
    if zf > 50:
        raise DomainError(f"|z| = {zf} is outside the series regime |z| <= 50")
    growth = zf ** (1.0 / float(alpha)) if zf > 0 else 0.0
    if growth > 2.0e4:
        raise DomainError(f"series for |z|={zf}, alpha={alpha} needs too many guard bits")
    guard = int(growth / math.log(2)) + 64
    with mp.working_precision(prec + guard):
        a = mp.mpf(alpha)
        b = mp.mpf(beta)
        z = mp.mpf(z)
        if z == 0:
            total = 1 / gmpy2.gamma(b) if not gmpy2.is_zero(1 / gmpy2.gamma(b)) else mp.mpfr(0)
        else:
            threshold = mp.mpfr(2) ** (-(prec + guard))
            total = mp.mpfr(0)
            power = mp.mpfr(1)
            small_run = 0
            j = 0
            while True:
                arg = a * j + b
                # 1/Gamma vanishes at non-positive integers
                rg = mp.mpfr(0) if (arg <= 0 and gmpy2.is_integer(arg)) else 1 / gmpy2.gamma(arg)
                term = power * rg
                total += term
                if j > growth and abs(term) <= threshold * max(abs(total), threshold):
                    small_run += 1
                    if small_run >= 3:
                        break
                else:
                    small_run = 0
                power *= z
                j += 1
                if j > 200000:
                    raise AccuracyError("Mittag-Leffler series failed to converge")
    with mp.working_precision(prec):
        return +total


def scalar_reference(alpha, lam, v, t, prec: int = mp.DEFAULT_PREC):
    """``v E_alpha(-lam t**alpha)``: solution of ``d^alpha (u - v) = -lam u``."""
    if float(lam) <= 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    with mp.working_precision(prec):
        t = mp.mpf(t)
        v = mp.mpf(v)
        if t == 0:
            return v
        z = -mp.mpf(lam) * t ** mp.mpf(alpha)
    return v * mittag_leffler(alpha, 1, z, prec)
