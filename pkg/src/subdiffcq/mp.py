"""Extended-precision scalars and object arrays backed by gmpy2 (MPFR/MPC).

Every numeric routine in the package works on ``gmpy2.mpfr`` / ``gmpy2.mpc``
scalars, usually packed in numpy ``dtype=object`` arrays so that dot products
and row updates run in numpy's C loops.  Precision is given in significand
bits and applied through :func:`working_precision`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

import gmpy2
import numpy as np

DEFAULT_PREC = 256

mpfr = gmpy2.mpfr
mpc = gmpy2.mpc


def working_precision(bits: int):
    """Context manager that sets the MPFR/MPC working precision to ``bits``."""
    if bits < 24:
        raise ValueError(f"precision must be at least 24 bits, got {bits}")
    return gmpy2.context(gmpy2.get_context(), precision=int(bits))


def digits(bits: int) -> int:
    """Number of full decimal digits carried by a ``bits``-bit significand."""
    return int(bits * math.log10(2))


def eps(bits: int):
    return mpfr(2) ** (1 - int(bits))


def mpf(x) -> gmpy2.mpfr:
    """Convert to mpfr at the current precision.

    Python floats are converted through their shortest decimal repr so that a
    user-typed ``0.3`` becomes the extended-precision value of 3/10, not the
    binary double nearest to it.
    """
    if isinstance(x, (float, np.floating)):
        return mpfr(repr(float(x)))
    if isinstance(x, np.integer):
        return mpfr(int(x))
    if isinstance(x, Fraction):
        return mpfr(gmpy2.mpq(x.numerator, x.denominator))
    if isinstance(x, gmpy2.mpfr):
        # re-round to the current context
        return +x
    return mpfr(x)


def pi():
    return gmpy2.const_pi()


def gamma(x):
    return gmpy2.gamma(mpf(x))


def array(values: Iterable) -> np.ndarray:
    """1-D object array of mpfr values."""
    out = [mpf(v) for v in values]
    arr = np.empty(len(out), dtype=object)
    arr[:] = out
    return arr


def zeros(shape) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    arr.fill(mpfr(0))
    return arr


def identity(n: int) -> np.ndarray:
    arr = zeros((n, n))
    for i in range(n):
        arr[i, i] = mpfr(1)
    return arr


def frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def to_float(arr) -> np.ndarray:
    return np.asarray(arr, dtype=object).astype(float)


def max_abs(arr):
    flat = np.asarray(arr, dtype=object).ravel()
    if flat.size == 0:
        return mpfr(0)
    return max(abs(x) for x in flat)


def to_decimal(x) -> str:
    """Round-trippable decimal string of an mpfr."""
    return str(x)
