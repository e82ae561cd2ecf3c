import gmpy2
import numpy as np
import pytest

from subdiffcq import mp
from subdiffcq.cq_weights import bdf_poly, int_power_weights
from subdiffcq.errors import ConfigError, ShapeError
from subdiffcq.harness import case_b_source, initial_data
from subdiffcq.oracle import scalar_reference
from subdiffcq.smoothing import SourceSpec, build_smoothed_table
from subdiffcq.spatial import build_spatial, discrete_l2_norm, sample, scalar_operator
from subdiffcq.stepper import (SchemeConfig, _source_coefficients, march, march_baseline,
                               residual, run)

RESIDUAL_BOUND = gmpy2.mpfr(10) ** -40


@pytest.fixture(scope="module")
def op8():
    return build_spatial(8)


@pytest.fixture(scope="module")
def v8(op8):
    return sample(initial_data, op8)


@pytest.fixture(scope="module")
def product_traj(op8, v8):
    return march(SchemeConfig(0.3, 4, 2, 24, M=8), op8, v8, case_b_source("product", -0.4))


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(alpha=0, k=2, m=1, N=10), dict(alpha=1, k=2, m=1, N=10),
        dict(alpha=0.5, k=7, m=1, N=10), dict(alpha=0.5, k=2, m=3, N=10),
        dict(alpha=0.5, k=2, m=-1, N=10), dict(alpha=0.5, k=4, m=1, N=3),
        dict(alpha=0.5, k=2, m=1, N=10, T=0),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            SchemeConfig(**kwargs)

    def test_step_size(self):
        assert SchemeConfig(0.5, 2, 1, 8, T=2).tau == gmpy2.mpfr(0.25)


class TestZeroData:
    def test_smoothed_scheme(self, op8):
        traj = march(SchemeConfig(0.5, 3, 2, 12, M=8), op8, None, SourceSpec())
        assert all(x == 0 for x in traj.u.ravel())
        assert traj.max_residual == 0
        assert residual(traj, 5) == 0

    def test_baseline(self, op8):
        traj = march_baseline(SchemeConfig(0.5, 2, 0, 12, M=8), op8)
        assert all(x == 0 for x in traj.V.ravel())


class TestTrajectory:
    def test_starts_from_initial_data(self, product_traj, v8):
        assert all(x == 0 for x in product_traj.V[0])
        assert all(a == b for a, b in zip(product_traj.u[0], v8))
        assert product_traj.u.shape == (25, 7)

    def test_history_is_read_only(self, product_traj):
        with pytest.raises(ValueError):
            product_traj.V[1, 0] = 0

    def test_stored_residuals_are_small(self, product_traj):
        assert len(product_traj.step_residuals) == 24
        assert product_traj.max_residual < RESIDUAL_BOUND

    @pytest.mark.parametrize("n", [1, 2, 9, 24])
    def test_recomputed_residual(self, product_traj, n):
        assert residual(product_traj, n) < gmpy2.mpfr(10) ** -(mp.digits(256) - 12)

    def test_residual_index_range(self, product_traj):
        with pytest.raises(ValueError):
            residual(product_traj, 0)

    def test_perturbation_shows_in_residual(self, product_traj, op8):
        from dataclasses import replace
        n, node = 10, 3
        base = residual(product_traj, n)
        growth = []
        for eps in (gmpy2.mpfr(10) ** -20, gmpy2.mpfr(10) ** -15):
            V = product_traj.V.copy()
            V[n, node] = V[n, node] + eps
            bumped = residual(replace(product_traj, V=V), n)
            growth.append((bumped - base) / eps)
        # residual is linear in the perturbation with the step matrix column norm as slope
        assert growth[0] > 1
        assert abs(growth[0] - growth[1]) < 1e-10 * growth[0]


def test_baseline_residuals(op8, v8):
    traj = march_baseline(SchemeConfig(0.3, 2, 0, 16, M=8), op8, v8,
                          case_b_source("product", -0.4))
    assert traj.max_residual < RESIDUAL_BOUND
    assert residual(traj, 16) < RESIDUAL_BOUND


def test_entry_points_check_m(op8):
    with pytest.raises(ConfigError):
        march(SchemeConfig(0.5, 2, 0, 8, M=8), op8)
    with pytest.raises(ConfigError):
        march_baseline(SchemeConfig(0.5, 2, 1, 8, M=8), op8)


def test_initial_data_shape(op8):
    with pytest.raises(ShapeError):
        march(SchemeConfig(0.5, 2, 1, 8, M=8), op8, mp.zeros(op8.size + 2))


@pytest.mark.parametrize("m,mode,mu", [(2, "product", -0.4), (3, "convolution", 0.3)])
def test_linearity_in_data(op8, v8, m, mode, mu):
    cfg = SchemeConfig(0.7, 3, m, 16, M=8)
    spec = case_b_source(mode, mu)
    both = run(cfg, op8, v8, spec)
    source_only = run(cfg, op8, None, spec)
    data_only = run(cfg, op8, v8, SourceSpec())
    diff = both.V[-1] - source_only.V[-1] - data_only.V[-1]
    assert discrete_l2_norm(diff, op8) < gmpy2.mpfr(10) ** -60


def test_source_convolution_ignores_old_history():
    cfg = SchemeConfig(0.5, 2, 2, 20)
    z = int_power_weights(bdf_poly(2), 2, 20).weights
    assert all(x == 0 for x in z[5:])
    table = build_smoothed_table(case_b_source("product", -0.4), 2, 20).values
    garbage = table.copy()
    n = 15
    garbage[:n - 4] = gmpy2.mpfr(1) / 3  # entries older than lag km = 4
    _, b_ref = _source_coefficients(cfg, z, table)
    _, b_new = _source_coefficients(cfg, z, garbage)
    assert b_ref[n] == b_new[n]


def test_scalar_model_second_order():
    # A = -1, v = 1, g = 0, alpha = 0.5: u(1) = E_{1/2}(-1)
    op = scalar_operator(1)
    ref = scalar_reference(0.5, 1, 1, 1)
    Ns = [40, 80, 160]
    errs = [float(abs(run(SchemeConfig(0.5, 2, 1, N), op, mp.array([1])).final[0] - ref))
            for N in Ns]
    slope = -np.polyfit(np.log2(Ns), np.log2(errs), 1)[0]
    assert slope >= 2 - 0.2


def test_case_a_sixth_order_small_grid():
    op = build_spatial(12)
    v = sample(initial_data, op)
    finals = [run(SchemeConfig(0.7, 6, 4, N, M=12), op, v).final for N in (25, 50, 100, 200)]
    errs = [float(discrete_l2_norm(a - b, op)) for a, b in zip(finals, finals[1:])]
    rate = np.log2(errs[-2] / errs[-1])
    assert rate > 5.5
