"""BDF generating polynomials and convolution-quadrature weights.

The BDF``k`` discrete derivative has generating polynomial

    tau * delta_k(xi) = sum_{j=1}^{k} (1 - xi)^j / j,

and the fractional operator of order ``p`` uses the power-series
coefficients of ``(tau * delta_k(xi))^p``.  Those coefficients are
``tau``-free; the scheme divides by ``tau**p`` when it applies them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import gmpy2
import numpy as np

from . import mp
from .errors import AccuracyError, IllPosedBranchError, InvalidOrderError

MAX_BDF_ORDER = 6
MAX_EULERIAN_ROW = 12


@dataclass(frozen=True)
class PolyCoeffs:
    """Polynomial in ``xi``; ``coeffs[j]`` multiplies ``xi**j``.

    ``exact`` holds the rational coefficients when they are known exactly
    (always the case for BDF polynomials) so integer powers stay exact.
    """

    coeffs: tuple
    prec: int = mp.DEFAULT_PREC
    exact: tuple[Fraction, ...] | None = None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class WeightTable:
    """Weights ``w_0 .. w_N`` of ``poly**order``; apply as ``tau**(-order) * sum``."""

    order: object
    k: int
    weights: np.ndarray
    prec: int = mp.DEFAULT_PREC

    @property
    def tau_exponent(self):
        return self.order

    @property
    def N(self) -> int:
        return len(self.weights) - 1

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, j):
        return self.weights[j]


@dataclass(frozen=True)
class EulerianRow:
    l: int
    a: tuple[int, ...]


def _bdf_exact(k: int) -> list[Fraction]:
    coeffs = [Fraction(0)] * (k + 1)
    for j in range(1, k + 1):
        for i in range(j + 1):
            coeffs[i] += Fraction((-1) ** i * comb(j, i), j)
    return coeffs


def bdf_poly(k: int, prec: int = mp.DEFAULT_PREC) -> PolyCoeffs:
    """Coefficients of ``tau * delta_k(xi)`` for BDF order ``k`` in 1..6."""
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_BDF_ORDER:
        raise InvalidOrderError(f"BDF order must be an integer in 1..{MAX_BDF_ORDER}, got {k!r}")
    exact = _bdf_exact(int(k))
    with mp.working_precision(prec):
        coeffs = tuple(mp.mpf(c) for c in exact)
    return PolyCoeffs(coeffs, prec, tuple(exact))


def frac_power_weights(poly: PolyCoeffs, p, N: int, prec: int | None = None) -> WeightTable:
    """First ``N + 1`` coefficients of ``poly(xi)**p`` by the power-series recurrence.

    ``w_0 = c_0**p`` and, for ``n >= 1``,
    ``w_n = (1 / (n c_0)) * sum_{j=1}^{min(n, deg)} ((p + 1) j - n) c_j w_{n-j}``.
    """
    prec = poly.prec if prec is None else prec
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    with mp.working_precision(prec):
        c = [mp.mpf(x) for x in poly.coeffs]
        if c[0] <= 0:
            raise IllPosedBranchError(
                f"constant coefficient must be positive for a real power, got {c[0]}")
        p = mp.mpf(p)
        deg = len(c) - 1
        w = [c[0] ** p]
        for n in range(1, N + 1):
            acc = mp.mpfr(0)
            for j in range(1, min(n, deg) + 1):
                acc += ((p + 1) * j - n) * c[j] * w[n - j]
            w.append(acc / (n * c[0]))
        weights = mp.frozen(mp.array(w))
    return WeightTable(p, poly.degree, weights, prec)


def frac_power_weights_fft(poly: PolyCoeffs, p, N: int, prec: int | None = None,
                           tol=None) -> WeightTable:
    """Cross-check of :func:`frac_power_weights` by Cauchy-integral sampling.

    ``poly**p`` is sampled at ``2 (N + 1)`` points on the circle of radius
    ``rho = eps**(1 / (2N))``, ``eps = 10**(-D/2)``, and the coefficients are
    recovered by an inverse DFT with radius rescaling.  The DFT runs at twice
    the requested precision (plus guard bits) so that the ``rho**(-N)``
    amplification and the aliasing floor both stay below the output precision.
    """
    prec = poly.prec if prec is None else prec
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    if poly.coeffs[0] <= 0:
        raise IllPosedBranchError(
            f"constant coefficient must be positive for a real power, got {poly.coeffs[0]}")
    inner = 2 * prec + 64
    n_samples = 2 * (N + 1)
    with mp.working_precision(inner):
        d_inner = mp.digits(inner)
        small = mp.mpfr(10) ** (-mp.mpfr(d_inner) / 2)
        rho = small ** (mp.mpfr(1) / (2 * max(N, 1)))
        p = mp.mpf(p)
        c = [mp.mpf(x) for x in poly.coeffs]
        two_pi = 2 * mp.pi()
        roots = [gmpy2.mpc(gmpy2.cos(two_pi * l / n_samples), gmpy2.sin(two_pi * l / n_samples))
                 for l in range(n_samples)]
        samples = []
        for l in range(n_samples):
            xi = rho * roots[l]
            val = gmpy2.mpc(0)
            for cj in reversed(c):
                val = val * xi + cj
            samples.append(val ** p)
        samples = np.array(samples, dtype=object)
        conj_roots = np.array([r.conjugate() for r in roots], dtype=object)
        idx = np.arange(n_samples)
        coeffs = []
        scaled = []
        for j in range(n_samples):
            s = np.dot(samples, conj_roots[(j * idx) % n_samples]) / n_samples
            scaled.append(abs(s))
            coeffs.append(s.real / rho ** j)
        tail = max(scaled[n_samples // 2:]) * rho ** n_samples
        scale = max(mp.mpfr(1), max(abs(x) for x in coeffs[:N + 1]))
        if tol is None:
            tol = mp.mpfr(10) ** (-(mp.digits(prec) - 10))
        if tail > tol * scale:
            raise AccuracyError(
                f"DFT coefficient recovery did not converge: tail estimate {float(tail):.3e} "
                f"exceeds tolerance {float(tol * scale):.3e} (N={N}, samples={n_samples})")
    with mp.working_precision(prec):
        weights = mp.frozen(mp.array(coeffs[:N + 1]))
    return WeightTable(p, poly.degree, weights, prec)


def int_power_weights(poly: PolyCoeffs, m: int, N: int, prec: int | None = None) -> WeightTable:
    """Coefficients of ``poly**m`` (finite support ``deg * m``), padded/truncated to ``N + 1``."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise InvalidOrderError(f"integer power must be >= 1, got {m!r}")
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    prec = poly.prec if prec is None else prec
    base = list(poly.exact) if poly.exact is not None else None
    with mp.working_precision(prec):
        if base is None:
            base = [mp.mpf(x) for x in poly.coeffs]
        prod = list(base)
        for _ in range(int(m) - 1):
            nxt = [0] * (len(prod) + len(base) - 1)
            for i, a in enumerate(prod):
                for j, b in enumerate(base):
                    nxt[i + j] += a * b
            prod = nxt
        prod = (prod + [0] * (N + 1))[:N + 1]
        weights = mp.frozen(mp.array(prod))
    return WeightTable(int(m), poly.degree, weights, prec)


def cauchy_product(a, b, N: int | None = None) -> np.ndarray:
    """Truncated product of two coefficient sequences."""
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    if N is None:
        N = min(len(a), len(b)) - 1
    out = mp.zeros(N + 1)
    for n in range(N + 1):
        lo = max(0, n - len(b) + 1)
        hi = min(n, len(a) - 1)
        if lo <= hi:
            out[n] = np.dot(a[lo:hi + 1], b[n - hi:n - lo + 1][::-1])
    return out


def eulerian_coeffs(l: int) -> EulerianRow:
    """Row ``a_{l,1..l}`` of ``a_{l,j} = j a_{l-1,j} + (l+1-j) a_{l-1,j-1}``, ``a_{0,0} = 1``."""
    if not isinstance(l, (int, np.integer)) or not 1 <= l <= MAX_EULERIAN_ROW:
        raise InvalidOrderError(f"row index must be in 1..{MAX_EULERIAN_ROW}, got {l!r}")
    row = [1, 0]  # a_{0,0}, a_{0,1}
    for ll in range(1, int(l) + 1):
        new = [0] * (ll + 2)
        for j in range(1, ll + 1):
            new[j] = j * row[j] + (ll + 1 - j) * row[j - 1]
        row = new
    return EulerianRow(int(l), tuple(row[1:l + 1]))


def gamma_series(l: int, xi, prec: int = mp.DEFAULT_PREC):
    """``sum_{n>=1} n**l xi**n`` through its Eulerian rational form."""
    row = eulerian_coeffs(l)
    with mp.working_precision(prec):
        xi = mp.mpf(xi)
        num = mp.mpfr(0)
        for j, a in enumerate(row.a, start=1):
            num += a * xi ** j
        return num / (1 - xi) ** (l + 1)


def gamma_series_defect(l: int, eta, prec: int = mp.DEFAULT_PREC):
    """``|gamma_l(exp(-eta)) eta**(l+1) / l! - 1|``, the quantity whose order in ``eta`` is l+1 (odd l) or l+2 (even l)."""
    with mp.working_precision(prec):
        eta = mp.mpf(eta)
        g = gamma_series(l, gmpy2.exp(-eta), prec)
        return abs(g * eta ** (l + 1) / factorial(l) - 1)
