"""Refinement studies, convergence rates and table output.

Rates follow the successive-difference convention of the published tables

    error(N) = ||u^{N}(T) - u^{2N}(T)||,
    rate(N)  = log2(error(N/2) / error(N))
             = log2(||u^{N/2} - u^{N}|| / ||u^{N} - u^{2N}||),

so a study over ``N = 200, 400, 800`` also marches ``N = 1600``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import gmpy2
import numpy as np

from . import mp
from .cq_weights import WeightTable
from .errors import ConfigError
from .oracle import contour_solution, scalar_reference
from .smoothing import SmoothedTable, SourceSpec, TimeKernelTerm
from .spatial import SpatialOperator, build_spatial, discrete_l2_norm, sample, scalar_operator
from .stepper import SchemeConfig, Trajectory, run

CASE_IDS = ("a", "b-conv", "b-prod", "scalar", "oracle-compare", "baseline")


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    error: object
    rate: object = None


@dataclass(frozen=True)
class ExperimentCase:
    id: str
    alpha: float
    k: int = 6
    m: int = 1
    N_list: tuple[int, ...] = (200, 400, 800)
    mu: float | None = None
    M: int = 32
    prec: int = mp.DEFAULT_PREC
    T: float = 1
    quad_n: int = 64
    lam: float = 1
    zero_data: bool = False

    def __post_init__(self):
        if self.id not in CASE_IDS:
            raise ConfigError(f"unknown case {self.id!r}; expected one of {CASE_IDS}")
        object.__setattr__(self, "N_list", tuple(int(n) for n in self.N_list))
        if self.id in ("b-conv", "b-prod", "baseline") and self.mu is None:
            raise ConfigError(f"case {self.id!r} needs mu")
        if self.id == "baseline" and self.m != 0:
            object.__setattr__(self, "m", 0)

    def config(self, N: int) -> SchemeConfig:
        return SchemeConfig(self.alpha, self.k, self.m, N, self.T, self.prec, self.M, self.quad_n)


# -- problem data -------------------------------------------------------------

def initial_data(x):
    """``sin(x) sqrt(1 - x^2)``."""
    return gmpy2.sin(x) * gmpy2.sqrt(1 - x * x)


def indicator_01(x):
    """Indicator of the open interval (0, 1); zero at both ends."""
    return mp.mpfr(1) if 0 < x < 1 else mp.mpfr(0)


def case_b_spatial(x):
    """``e^x (1 + chi_(0,1)(x))``."""
    return gmpy2.exp(x) * (1 + indicator_01(x))


def case_b_time_factor(t):
    """``e^t + 1``."""
    return gmpy2.exp(t) + 1


def case_b_source(mode: str, mu) -> SourceSpec:
    """``g(x, t) = (1 + t^mu) o (e^t + 1) e^x (1 + chi_(0,1)(x))``, ``o`` = product or convolution."""
    if mode not in ("product", "convolution"):
        raise ConfigError(f"case (b) composes by product or convolution, got {mode!r}")
    terms = (TimeKernelTerm(1, 0, case_b_time_factor),
             TimeKernelTerm(1, mu, case_b_time_factor))
    sym = "*" if mode == "convolution" else "x"
    return SourceSpec(mode, terms, case_b_spatial,
                      f"(1 + t^{mu}) {sym} (e^t + 1) e^x (1 + chi_(0,1)(x))")


def power_source(mu, profile=case_b_spatial) -> SourceSpec:
    """Pure power ``t^mu q(x)``."""
    return SourceSpec("pure_power", (TimeKernelTerm(1, mu),), profile, f"t^{mu} q(x)")


def setup(case: ExperimentCase) -> tuple[SpatialOperator, np.ndarray, SourceSpec]:
    """Operator, initial nodal vector and source for a case."""
    if case.id == "scalar":
        op = scalar_operator(case.lam, case.prec)
        with mp.working_precision(case.prec):
            v = mp.array([0 if case.zero_data else 1])
        return op, v, SourceSpec()
    op = build_spatial(case.M, case.prec)
    if case.zero_data:
        with mp.working_precision(case.prec):
            return op, mp.zeros(op.size), SourceSpec()
    v = sample(initial_data, op)
    if case.id == "a":
        spec = SourceSpec()
    elif case.id == "b-conv":
        spec = case_b_source("convolution", case.mu)
    elif case.id in ("b-prod", "baseline"):
        spec = case_b_source("product", case.mu)
    else:  # oracle-compare
        spec = SourceSpec() if case.mu is None else power_source(case.mu)
    return op, v, spec


# -- studies ------------------------------------------------------------------

def _check_doubling(N_list: Sequence[int], k: int):
    if not N_list:
        raise ConfigError("N list is empty")
    for a, b in zip(N_list, N_list[1:]):
        if b != 2 * a:
            raise ConfigError(f"N list must double at each step, got {list(N_list)}")
    if N_list[0] < 2 * k:
        raise ConfigError(f"smallest N must be >= 2k = {2 * k}, got {N_list[0]}")


def _rate(prev, cur):
    if prev is None or prev == 0 or cur == 0:
        return None
    return gmpy2.log2(prev / cur)


def _rows(Ns, errors):
    rows, prev = [], None
    for N, err in zip(Ns, errors):
        rows.append(ConvergenceRow(N, err, _rate(prev, err)))
        prev = err
    return rows


def march_case(case: ExperimentCase, N: int, op=None, v=None, spec=None) -> Trajectory:
    if op is None:
        op, v, spec = setup(case)
    return run(case.config(N), op, v, spec)


def run_study(case: ExperimentCase, keep: list | None = None) -> list[ConvergenceRow]:
    """Successive-difference errors ``||u^N - u^{2N}||`` at ``t = T`` for each ``N`` in the list.

    Trajectories are appended to ``keep`` when given (for residual checks).
    """
    _check_doubling(case.N_list, case.k)
    op, v, spec = setup(case)
    Ns = list(case.N_list) + [2 * case.N_list[-1]]
    finals = []
    for N in Ns:
        traj = march_case(case, N, op, v, spec)
        finals.append(traj.final)
        if keep is not None:
            keep.append(traj)
    with mp.working_precision(case.prec):
        errors = [discrete_l2_norm(finals[i] - finals[i + 1], op) for i in range(len(Ns) - 1)]
    return _rows(case.N_list, errors)


def reference_solution(case: ExperimentCase, op, v, spec, params=None):
    if case.id == "scalar":
        with mp.working_precision(case.prec):
            return mp.array([scalar_reference(case.alpha, case.lam, v[0], case.T, case.prec)])
    if case.id not in ("a", "oracle-compare"):
        raise ConfigError(f"oracle comparison needs a pure-power or zero source; case {case.id!r}")
    if spec.is_zero:
        return contour_solution(op, v, case.alpha, None, None, case.T, params, case.prec)
    q = sample(spec.spatial_profile, op)
    return contour_solution(op, v, case.alpha, case.mu, q, case.T, params, case.prec)


def run_oracle_compare(case: ExperimentCase, keep: list | None = None,
                       params=None) -> list[ConvergenceRow]:
    """Errors against the contour-integral (or Mittag-Leffler) reference at ``t = T``."""
    _check_doubling(case.N_list, case.k)
    op, v, spec = setup(case)
    ref = reference_solution(case, op, v, spec, params)
    errors = []
    for N in case.N_list:
        traj = march_case(case, N, op, v, spec)
        if keep is not None:
            keep.append(traj)
        with mp.working_precision(case.prec):
            errors.append(discrete_l2_norm(traj.final - ref, op))
    return _rows(case.N_list, errors)


def fitted_order(rows: Sequence[ConvergenceRow]) -> float | None:
    """Least-squares slope of ``-log2(error)`` against ``log2(N)``."""
    pts = [(math.log2(r.N), math.log2(float(r.error))) for r in rows if r.error and float(r.error) > 0]
    if len(pts) < 2:
        return None
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    return float(-np.polyfit(x, y, 1)[0])


# -- output -------------------------------------------------------------------

def _fmt(x) -> str:
    return "" if x is None else mp.to_decimal(x)


def emit(rows: Sequence[ConvergenceRow], format: str = "csv", path=None) -> str:
    """Render rows as CSV (``N,error,rate`` full precision) or a markdown table; write to ``path`` if given."""
    if not rows:
        raise ValueError("no rows to emit")
    if format == "csv":
        lines = ["N,error,rate"]
        lines += [f"{r.N},{_fmt(r.error)},{_fmt(r.rate)}" for r in rows]
    elif format in ("markdown", "md"):
        lines = ["| | " + " | ".join(f"N={r.N}" for r in rows) + " |",
                 "|---|" + "---|" * len(rows),
                 "| error | " + " | ".join(f"{float(r.error):.4e}" for r in rows) + " |",
                 "| rate | " + " | ".join("" if r.rate is None else f"{float(r.rate):.4f}"
                                         for r in rows) + " |"]
    else:
        raise ConfigError(f"unknown format {format!r}; expected csv or markdown")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(path, prec: int = mp.DEFAULT_PREC) -> list[ConvergenceRow]:
    rows = []
    with open(path, newline="") as fh, mp.working_precision(prec):
        for rec in csv.DictReader(fh):
            rate = mp.mpfr(rec["rate"]) if rec["rate"] else None
            rows.append(ConvergenceRow(int(rec["N"]), mp.mpfr(rec["error"]), rate))
    return rows


def write_weights_csv(table: WeightTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "weight"])
        for j, w in enumerate(table.weights):
            writer.writerow([j, mp.to_decimal(w)])


def write_smoothed_csv(table: SmoothedTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "t_n", "G"])
        for n, (t, g) in enumerate(zip(table.times, table.values)):
            writer.writerow([n, mp.to_decimal(t), mp.to_decimal(g)])


def write_snapshot_csv(points, values, path) -> None:
    """Nodal vector at interior points, e.g. ``u^N`` of a trajectory or an oracle vector."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "u"])
        for x, u in zip(points, values):
            writer.writerow([mp.to_decimal(x), mp.to_decimal(u)])
