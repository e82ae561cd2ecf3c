"""Exception hierarchy.  Each error carries a short machine-readable ``code``."""

from __future__ import annotations


class SubdiffError(Exception):
    code = "error"


class InvalidOrderError(SubdiffError, ValueError):
    code = "invalid-order"


class IllPosedBranchError(SubdiffError, ValueError):
    code = "ill-posed-branch"


class InvalidWeightError(SubdiffError, ValueError):
    code = "invalid-weight"


class InvalidResolutionError(SubdiffError, ValueError):
    code = "invalid-resolution"


class ShapeError(SubdiffError, ValueError):
    code = "shape"


class ConfigError(SubdiffError, ValueError):
    code = "config"


class DomainError(SubdiffError, ValueError):
    code = "domain"


class AccuracyError(SubdiffError, ArithmeticError):
    code = "accuracy"


class LinearSolverError(SubdiffError, ArithmeticError):
    code = "linear-solver"
