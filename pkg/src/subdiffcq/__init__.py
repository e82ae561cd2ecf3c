"""IDm-BDFk convolution quadrature for subdiffusion with weakly singular sources.

All numerics run in configurable extended precision (gmpy2/MPFR); the
default is a 256-bit significand.
"""

from .cq_weights import (EulerianRow, PolyCoeffs, WeightTable, bdf_poly, eulerian_coeffs,
                         frac_power_weights, frac_power_weights_fft, int_power_weights)
from .errors import (AccuracyError, ConfigError, DomainError, IllPosedBranchError,
                     InvalidOrderError, InvalidResolutionError, InvalidWeightError,
                     LinearSolverError, ShapeError, SubdiffError)
from .harness import (ConvergenceRow, ExperimentCase, emit, fitted_order, run_oracle_compare,
                      run_study)
from .mp import DEFAULT_PREC, working_precision
from .oracle import ContourParams, contour_solution, mittag_leffler, scalar_reference
from .smoothing import (SmoothedTable, SourceSpec, TimeKernelTerm, build_smoothed_table,
                        jacobi_rule, smooth_convolution, smooth_product, smooth_pure_power)
from .spatial import SpatialOperator, build_spatial, discrete_l2_norm
from .stepper import SchemeConfig, Trajectory, march, march_baseline, residual

__version__ = "0.1.0"
