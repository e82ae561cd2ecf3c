"""Command-line front end: ``subdiffcq {study,oracle-compare,weights}``.

Options may also come from a JSON file (``--config``) using the same keys as
the long flags (``prec_bits`` or ``prec-bits`` both accepted); flags given on
the command line win.  Failures print one JSON line ``{"error": code,
"message": ...}`` on stderr and exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import mp
from .cq_weights import bdf_poly, frac_power_weights, int_power_weights
from .errors import ConfigError, SubdiffError
from .harness import (ExperimentCase, emit, fitted_order, run_oracle_compare, run_study,
                      write_weights_csv)

log = logging.getLogger("subdiffcq")

STUDY_DEFAULTS = {
    "case": "a", "alpha": 0.3, "mu": None, "k": 6, "m": 1, "N": "200,400,800",
    "M": 32, "prec_bits": mp.DEFAULT_PREC, "T": 1.0, "quad_n": 64,
    "format": "csv", "out": None,
}
WEIGHT_DEFAULTS = {"k": 2, "order": 0.5, "n": 16, "prec_bits": mp.DEFAULT_PREC, "out": None}


def _add_study_args(p: argparse.ArgumentParser, cases):
    p.add_argument("--case", choices=cases)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--N", help="comma-separated doubling list, e.g. 200,400,800")
    p.add_argument("--M", type=int)
    p.add_argument("--prec-bits", dest="prec_bits", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--quad-n", dest="quad_n", type=int)
    p.add_argument("--format", choices=("csv", "markdown"))
    p.add_argument("--out")
    p.add_argument("--config", help="JSON file with default values for the options above")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subdiffcq",
        description="IDm-BDFk convolution quadrature for subdiffusion with singular sources")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    study = sub.add_parser("study", help="successive-difference convergence study")
    _add_study_args(study, ("a", "b-conv", "b-prod", "baseline", "scalar"))

    oracle = sub.add_parser("oracle-compare", help="errors against the contour-integral reference")
    _add_study_args(oracle, ("a", "oracle-compare", "scalar"))

    weights = sub.add_parser("weights", help="export BDFk convolution weights as CSV")
    weights.add_argument("--k", type=int)
    weights.add_argument("--order", type=float)
    weights.add_argument("--n", type=int)
    weights.add_argument("--prec-bits", dest="prec_bits", type=int)
    weights.add_argument("--out")
    weights.add_argument("--config")
    return parser


def _merge(args: argparse.Namespace, defaults: dict) -> dict:
    opts = dict(defaults)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in opts:
                raise ConfigError(f"unknown config key {key!r}")
            opts[key] = value
    for key in opts:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    return opts


def _parse_N(value) -> tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(int(x) for x in value)
    try:
        return tuple(int(x) for x in str(value).split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse N list {value!r}") from exc


def _case(opts: dict) -> ExperimentCase:
    return ExperimentCase(
        id=opts["case"], alpha=opts["alpha"], k=int(opts["k"]), m=int(opts["m"]),
        N_list=_parse_N(opts["N"]), mu=opts["mu"], M=int(opts["M"]),
        prec=int(opts["prec_bits"]), T=opts["T"], quad_n=int(opts["quad_n"]))


def _output(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise SubdiffError(f"cannot write {path}: {exc}") from exc


def cmd_study(args) -> int:
    opts = _merge(args, STUDY_DEFAULTS)
    case = _case(opts)
    rows = run_study(case)
    _output(emit(rows, opts["format"]), opts["out"])
    return 0


def cmd_oracle(args) -> int:
    opts = _merge(args, dict(STUDY_DEFAULTS, case="a"))
    case = _case(opts)
    rows = run_oracle_compare(case)
    _output(emit(rows, opts["format"]), opts["out"])
    log.info("fitted order %.4f", fitted_order(rows) or float("nan"))
    return 0


def cmd_weights(args) -> int:
    opts = _merge(args, WEIGHT_DEFAULTS)
    prec = int(opts["prec_bits"])
    poly = bdf_poly(int(opts["k"]), prec)
    order = opts["order"]
    n = int(opts["n"])
    if float(order).is_integer() and float(order) >= 1:
        table = int_power_weights(poly, int(order), n, prec)
    else:
        table = frac_power_weights(poly, order, n, prec)
    if opts["out"] is None:
        sys.stdout.write("j,weight\n")
        for j, w in enumerate(table.weights):
            sys.stdout.write(f"{j},{mp.to_decimal(w)}\n")
    else:
        try:
            write_weights_csv(table, opts["out"])
        except OSError as exc:
            raise SubdiffError(f"cannot write {opts['out']}: {exc}") from exc
    return 0


COMMANDS = {"study": cmd_study, "oracle-compare": cmd_oracle, "weights": cmd_weights}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except SubdiffError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return 2
    except (ValueError, TypeError) as exc:
        sys.stderr.write(json.dumps({"error": "invalid-argument", "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
