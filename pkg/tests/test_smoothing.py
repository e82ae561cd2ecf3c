import functools

import gmpy2
import numpy as np
import pytest

from subdiffcq import mp
from subdiffcq.errors import AccuracyError, ConfigError, InvalidWeightError
from subdiffcq.harness import case_b_source, case_b_time_factor
from subdiffcq.smoothing import (SourceSpec, TimeKernelTerm, build_smoothed_table,
                                 evaluate_source, jacobi_rule, smooth_convolution,
                                 smooth_product, smooth_pure_power, spatial_vector, time_grid)

DIGITS = mp.digits(256)


@functools.lru_cache(maxsize=None)
def newton_legendre(n):
    """Gauss-Legendre rule from Newton iteration on P_n (independent of Golub-Welsch)."""
    nodes, weights = [], []
    pi = gmpy2.const_pi()
    for i in range(1, n + 1):
        x = gmpy2.cos(pi * (i - gmpy2.mpfr(0.25)) / (n + gmpy2.mpfr(0.5)))
        for _ in range(100):
            p0, p1 = gmpy2.mpfr(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < gmpy2.mpfr(2) ** -250:
                break
        p0, p1 = gmpy2.mpfr(1), x
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dp * dp))
    return nodes, weights


def graded_reference(integrand, t, panels=10_000, grading=15, at_left=True, order=8):
    """Composite Gauss-Legendre over a mesh graded toward the singular endpoint."""
    x, w = newton_legendre(order)
    t = gmpy2.mpfr(t)
    edges = [t * (gmpy2.mpfr(i) / panels) ** grading for i in range(panels + 1)]
    if not at_left:
        edges = [t - e for e in reversed(edges)]
    total = gmpy2.mpfr(0)
    for lo, hi in zip(edges[:-1], edges[1:]):
        half, mid = (hi - lo) / 2, (hi + lo) / 2
        for xi, wi in zip(x, w):
            total += wi * half * integrand(mid + half * xi)
    return total


class TestJacobiRule:
    def test_legendre_two_points(self):
        x, w = jacobi_rule(0, 2)
        r = 1 / gmpy2.sqrt(gmpy2.mpfr(3))
        assert abs(x[0] + r) < 1e-70 and abs(x[1] - r) < 1e-70
        assert abs(w[0] - 1) < 1e-70 and abs(w[1] - 1) < 1e-70

    def test_singular_moment(self):
        _, w = jacobi_rule(-0.4, 8)
        ref = gmpy2.mpfr(2) ** mp.mpf(0.6) / mp.mpf(0.6)
        assert abs(sum(w) - ref) < gmpy2.mpfr(10) ** -(DIGITS - 10)

    def test_weighted_monomial(self):
        # int_{-1}^{1} (1+s)^b s^10 ds = sum_i C(10,i) (-1)^(10-i) 2^(b+i+1) / (b+i+1)
        b = mp.mpf(0.3)
        ref = sum(gmpy2.comb(10, i) * (-1) ** (10 - i) * gmpy2.mpfr(2) ** (b + i + 1) / (b + i + 1)
                  for i in range(11))
        x, w = jacobi_rule(0.3, 8)
        val = sum(wi * xi ** 10 for xi, wi in zip(x, w))
        assert abs(val - ref) / abs(ref) < gmpy2.mpfr(10) ** -(DIGITS - 15)

    @pytest.mark.parametrize("beta", [-0.9, -0.4, 0.0, 1.3, 4.7])
    @pytest.mark.parametrize("n", [1, 5, 12])
    def test_polynomial_exactness(self, beta, n):
        b = mp.mpf(beta)
        x, w = jacobi_rule(beta, n)
        for d in range(2 * n):
            # moments of (1+s)^b (1+s)^d
            ref = gmpy2.mpfr(2) ** (b + d + 1) / (b + d + 1)
            val = sum(wi * (1 + xi) ** d for xi, wi in zip(x, w))
            assert abs(val - ref) <= gmpy2.mpfr(10) ** -(DIGITS - 15) * ref

    def test_nodes_sorted_inside_interval(self):
        x, w = jacobi_rule(-0.4, 16)
        assert all(-1 < a < b < 1 for a, b in zip(x, x[1:]))
        assert all(wi > 0 for wi in w)

    def test_rejects_bad_weight(self):
        with pytest.raises(InvalidWeightError):
            jacobi_rule(-1, 4)


class TestPurePower:
    def test_one_integral_of_one(self):
        assert abs(smooth_pure_power(0, 1, mp.mpf(0.37)) - mp.mpf(0.37)) < 1e-70

    def test_two_integrals_of_t(self):
        assert abs(smooth_pure_power(1, 2, 1) - gmpy2.mpfr(1) / 6) < 1e-70

    def test_singular_power_matches_quadrature(self):
        ref = gmpy2.gamma(mp.mpf(0.6)) / gmpy2.gamma(mp.mpf(2.6))
        assert abs(smooth_pure_power(-0.4, 2, 1) - ref) < 1e-70
        # J^2 t^-0.4 at t=1 = int_0^1 (1-s) s^-0.4 ds, s = (1+y)/2
        x, w = jacobi_rule(-0.4, 4)
        quad = sum(wi * (1 - xi) / 2 for xi, wi in zip(x, w)) * gmpy2.mpfr(0.5) ** mp.mpf(0.6)
        assert abs(quad - ref) < 1e-70

    @pytest.mark.parametrize("mu", [-0.4, 0.3])
    def test_semigroup(self, mu):
        # J^m1 (c t^(mu+m2)) with c = Gamma(mu+1)/Gamma(mu+m2+1) is J^(m1+m2) t^mu
        t = mp.mpf(0.7)
        for total in range(1, 7):
            for m1 in range(1, total):
                m2 = total - m1
                nu = mp.mpf(mu) + m2
                c = gmpy2.gamma(mp.mpf(mu) + 1) / gmpy2.gamma(nu + 1)
                lhs = c * smooth_pure_power(nu, m1, t)
                assert abs(lhs - smooth_pure_power(mu, total, t)) < 1e-70

    def test_rejects_nonintegrable_power(self):
        with pytest.raises(ConfigError):
            smooth_pure_power(-1, 1, 1)


class TestProduct:
    def test_constant_factor(self):
        term = TimeKernelTerm(1, -0.4, lambda s: gmpy2.mpfr(1))
        for m in (1, 2, 5):
            val = smooth_product(term, m, mp.mpf(0.8))
            assert abs(val - smooth_pure_power(-0.4, m, mp.mpf(0.8))) < 1e-70

    def test_monomial_factor(self):
        term = TimeKernelTerm(1, 0.3, lambda s: s)
        assert abs(smooth_product(term, 1, 1) - 1 / mp.mpf(2.3)) < 1e-70

    def test_coefficient_scales(self):
        f = case_b_time_factor
        one = smooth_product(TimeKernelTerm(1, -0.4, f), 2, 1)
        three = smooth_product(TimeKernelTerm(3, -0.4, f), 2, 1)
        assert abs(three - 3 * one) < 1e-70

    def test_matches_graded_reference(self):
        mu = mp.mpf(-0.4)
        term = TimeKernelTerm(1, mu, case_b_time_factor)
        val = smooth_product(term, 2, 1)
        ref = graded_reference(lambda s: (1 - s) * s ** mu * case_b_time_factor(s), 1)
        assert abs(val - ref) < 1e-30

    def test_doubling_rule_is_stable(self):
        term = TimeKernelTerm(1, -0.4, case_b_time_factor)
        for m in (1, 3, 6):
            a = smooth_product(term, m, 1, quad_n=64)
            b = smooth_product(term, m, 1, quad_n=128)
            assert abs(a - b) < gmpy2.mpfr(10) ** -(DIGITS - 20)

    def test_reports_unconverged_quadrature(self):
        term = TimeKernelTerm(1, -0.4, lambda s: gmpy2.exp(40 * s))
        with pytest.raises(AccuracyError):
            smooth_product(term, 1, 1, quad_n=8)

    def test_needs_positive_m(self):
        with pytest.raises(ConfigError):
            smooth_product(TimeKernelTerm(1, 0.3, case_b_time_factor), 0, 1)


class TestConvolution:
    def test_constant_factor(self):
        term = TimeKernelTerm(1, 0.3, lambda s: gmpy2.mpfr(1))
        t = mp.mpf(0.6)
        mu = mp.mpf(0.3)
        for m in (0, 1, 4):
            ref = gmpy2.gamma(mu + 1) * t ** (mu + m + 1) / gmpy2.gamma(mu + m + 2)
            assert abs(smooth_convolution(term, m, t) - ref) < 1e-70

    def test_matches_graded_reference(self):
        mu = mp.mpf(0.3)
        term = TimeKernelTerm(1, mu, case_b_time_factor)
        val = smooth_convolution(term, 1, 1)
        scale = gmpy2.gamma(mu + 1) / gmpy2.gamma(mu + 2)
        ref = scale * graded_reference(lambda s: (1 - s) ** (mu + 1) * case_b_time_factor(s), 1,
                                       at_left=False)
        assert abs(val - ref) < 1e-30

    def test_linear_factor_is_sum_of_monomials(self):
        # (t^mu * (1 + s)) = Gamma(mu+1) (J^(mu+1) 1 + J^(mu+1) s)
        mu, m, t = mp.mpf(-0.4), 4, mp.mpf(0.9)
        term = TimeKernelTerm(1, mu, lambda s: 1 + s)
        g = gmpy2.gamma(mu + 1)
        ref = g * (t ** (mu + m + 1) / gmpy2.gamma(mu + m + 2)
                   + t ** (mu + m + 2) / gmpy2.gamma(mu + m + 3))
        assert abs(smooth_convolution(term, m, t) - ref) < 1e-70

    def test_doubling_rule_is_stable(self):
        term = TimeKernelTerm(1, 0.3, case_b_time_factor)
        for m in (1, 4):
            a = smooth_convolution(term, m, 1, quad_n=64)
            b = smooth_convolution(term, m, 1, quad_n=128)
            assert abs(a - b) < gmpy2.mpfr(10) ** -(DIGITS - 20)


class TestSourceSpec:
    def test_mode_none_has_no_terms(self):
        with pytest.raises(ConfigError):
            SourceSpec("none", (TimeKernelTerm(1, 0),))

    def test_pure_power_rejects_smooth_factor(self):
        with pytest.raises(ConfigError):
            SourceSpec("pure_power", (TimeKernelTerm(1, 0.3, case_b_time_factor),), lambda x: x)

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            SourceSpec("sum", (TimeKernelTerm(1, 0),), lambda x: x)

    def test_term_needs_integrable_power(self):
        with pytest.raises(ConfigError):
            TimeKernelTerm(1, -1.5)

    def test_zero_spec_samples_zero(self):
        vec = spatial_vector(SourceSpec(), [mp.mpf(0.1), mp.mpf(0.2)])
        assert list(vec) == [0, 0]


class TestSmoothedTable:
    def test_pure_power_table(self):
        spec = SourceSpec("pure_power", (TimeKernelTerm(2, 0.3),), lambda x: x)
        table = build_smoothed_table(spec, 2, 10)
        times = time_grid(10, 1)
        assert table.values[0] == 0
        for n in range(1, 11):
            assert abs(table.values[n] - 2 * smooth_pure_power(0.3, 2, times[n])) < 1e-70

    def test_product_table_pointwise(self):
        spec = case_b_source("product", -0.4)
        table = build_smoothed_table(spec, 2, 8)
        times = time_grid(8, 1)
        for n in range(1, 9):
            ref = sum(smooth_product(term, 2, times[n]) for term in spec.time_terms)
            assert abs(table.values[n] - ref) < 1e-70

    def test_rejects_null_source(self):
        with pytest.raises(ConfigError):
            build_smoothed_table(SourceSpec(), 1, 4)

    def test_error_names_time_node(self):
        spec = SourceSpec("product", (TimeKernelTerm(1, -0.4, lambda s: gmpy2.exp(40 * s)),),
                          lambda x: x)
        with pytest.raises(AccuracyError, match="n=1"):
            build_smoothed_table(spec, 1, 4, quad_n=8)

    @pytest.mark.parametrize("mode,mu,m", [("product", -0.4, 1), ("product", -0.4, 3),
                                           ("convolution", 0.3, 2)])
    def test_first_value_scales_like_power(self, mode, mu, m):
        # |G^1| ~ tau^(mu+m) for product, tau^(mu+m+1) for convolution
        spec = case_b_source(mode, mu)
        Ns = [2 ** e for e in range(4, 10)]
        g1 = [float(build_smoothed_table(spec, m, N).values[1]) for N in Ns]
        slope = np.polyfit(np.log(1 / np.array(Ns, dtype=float)), np.log(np.abs(g1)), 1)[0]
        # the constant term (exponent 0) dominates once mu + m > m
        expected = min(mu, 0) + m + (1 if mode == "convolution" else 0)
        assert slope >= expected - 0.05


def test_pointwise_source_values():
    spec = case_b_source("product", -0.4)
    t = mp.mpf(0.25)
    ref = (1 + t ** mp.mpf(-0.4)) * case_b_time_factor(t)
    assert abs(evaluate_source(spec, t) - ref) < 1e-70
    assert evaluate_source(SourceSpec(), t) == 0
