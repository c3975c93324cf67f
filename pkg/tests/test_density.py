import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgiso.density import (
    DoubleGaussianDensity,
    check_mass,
    check_region,
    normal_cdf,
    normal_sf,
    scaled_density_mass,
    tail_quantile,
)
from dgiso.quadrature import adaptive_simpson
from dgiso.suite import DEFAULT_VARIANCES

variances = st.floats(min_value=0.05, max_value=2.25)
abscissae = st.floats(min_value=-6.0, max_value=6.0)


def quad_mass(d, s, t):
    return adaptive_simpson(lambda x: float(d.pdf(x)), s, t, tol=1e-13)


class TestDensity:
    def test_half_of_twice_center_value(self):
        d = DoubleGaussianDensity(0.5)
        assert abs(2.0 * float(d.pdf(0.0)) - 0.415107) <= 1e-5

    @given(variances, abscissae)
    def test_even(self, v, x):
        d = DoubleGaussianDensity(v)
        assert float(d.pdf(x)) == float(d.pdf(-x))

    def test_high_precision_reference(self):
        d = DoubleGaussianDensity(1.0)
        with mpmath.workdps(50):
            ref = (mpmath.exp(0) + mpmath.exp(-2)) / (2 * mpmath.sqrt(2 * mpmath.pi))
        assert abs(float(d.pdf(1.0)) - float(ref)) <= 1e-14 * float(ref)

    def test_components_sum_to_density(self):
        d = DoubleGaussianDensity(0.3)
        x = np.linspace(-4, 4, 101)
        np.testing.assert_allclose(d.component_pdf(x, 1.0) + d.component_pdf(x, -1.0), d.pdf(x), rtol=1e-14)

    @given(variances, abscissae)
    def test_log_pdf_matches_log_of_pdf(self, v, x):
        d = DoubleGaussianDensity(v)
        f = float(d.pdf(x))
        if f > 1e-250:
            assert abs(float(d.log_pdf(x)) - math.log(f)) <= 1e-12 * max(1.0, abs(math.log(f)))

    def test_log_pdf_finite_far_out(self):
        assert math.isfinite(float(DoubleGaussianDensity(0.05).log_pdf(100.0)))

    @pytest.mark.parametrize("v", [0.0, -1.0, math.inf, math.nan])
    def test_rejects_bad_variance(self, v):
        with pytest.raises(ValueError):
            DoubleGaussianDensity(v)


class TestLogDerivatives:
    @pytest.mark.parametrize("v", DEFAULT_VARIANCES)
    def test_values_at_origin(self, v):
        d1, d2, d3 = DoubleGaussianDensity(v).psi_derivs(0.0)
        assert d1 == 0.0 and d3 == 0.0
        assert d2 == pytest.approx((1.0 - v) / v**2, rel=1e-14)

    def test_second_derivative_vanishes_at_origin_for_unit_variance(self):
        assert float(DoubleGaussianDensity(1.0).psi_second(0.0)) == 0.0

    def test_finite_differences_at_point(self):
        d = DoubleGaussianDensity(0.5)
        x, h = 0.3, 1e-5
        d1, d2, d3 = (float(v) for v in d.psi_derivs(x))
        assert abs(d1 - float(d.log_pdf(x + h) - d.log_pdf(x - h)) / (2 * h)) <= 1e-6
        assert abs(d2 - float(d.psi_prime(x + h) - d.psi_prime(x - h)) / (2 * h)) <= 1e-6
        assert abs(d3 - float(d.psi_second(x + h) - d.psi_second(x - h)) / (2 * h)) <= 1e-6

    @pytest.mark.parametrize("v", [0.1, 0.5, 1.0, 1.5])
    def test_against_mpmath_derivatives(self, v):
        d = DoubleGaussianDensity(v)

        def logf(x):
            return mpmath.log(mpmath.exp(-((x - 1) ** 2) / (2 * v)) + mpmath.exp(-((x + 1) ** 2) / (2 * v)))

        with mpmath.workdps(40):
            for x in (-1.7, -0.4, 0.05, 0.9, 2.3):
                got = [float(g) for g in d.psi_derivs(x)]
                ref = [float(mpmath.diff(logf, mpmath.mpf(x), n)) for n in (1, 2, 3)]
                for g, r in zip(got, ref):
                    assert abs(g - r) <= 1e-10 * max(1.0, abs(r))

    @given(variances, abscissae)
    def test_split_accessors_agree(self, v, x):
        d = DoubleGaussianDensity(v)
        d1, d2, _ = d.psi_derivs(x)
        assert float(d.psi_prime(x)) == float(d1)
        assert float(d.psi_second(x)) == float(d2)

    @given(st.floats(min_value=0.05, max_value=1.5), st.floats(min_value=0.01, max_value=5.0))
    def test_third_derivative_sign_structure(self, v, x):
        d = DoubleGaussianDensity(v)
        _, _, right = d.psi_derivs(x)
        _, _, left = d.psi_derivs(-x)
        if abs(float(right)) > 1e-300:
            assert right < 0 < left


class TestMasses:
    @pytest.mark.parametrize("v", DEFAULT_VARIANCES)
    def test_normalization(self, v):
        d = DoubleGaussianDensity(v)
        assert abs(d.interval_mass(-math.inf, math.inf) - 1.0) <= 1e-12
        assert d.interval_mass(0.0, math.inf) == pytest.approx(0.5, abs=1e-15)

    def test_interval_against_quadrature(self):
        d = DoubleGaussianDensity(0.5)
        assert abs(d.interval_mass(0.5, 1.5) - quad_mass(d, 0.5, 1.5)) <= 1e-10

    @given(variances, abscissae, abscissae)
    def test_symmetry(self, v, s, t):
        s, t = min(s, t), max(s, t)
        d = DoubleGaussianDensity(v)
        assert abs(d.interval_mass(-t, -s) - d.interval_mass(s, t)) <= 1e-13

    @given(variances, st.lists(abscissae, min_size=2, max_size=30))
    def test_cdf_monotone(self, v, xs):
        d = DoubleGaussianDensity(v)
        cdf = [d.interval_mass(-math.inf, x) for x in sorted(xs)]
        assert all(b >= a for a, b in zip(cdf, cdf[1:]))

    def test_tail_mass_is_complement_of_cdf(self):
        d = DoubleGaussianDensity(0.25)
        for x in (-2.0, -0.3, 0.0, 0.7, 3.0):
            assert float(d.tail_mass(x)) == pytest.approx(d.interval_mass(x, math.inf), abs=1e-15)

    def test_rejects_reversed_interval(self):
        with pytest.raises(ValueError):
            DoubleGaussianDensity(0.5).interval_mass(1.0, 0.0)

    def test_infinite_endpoints_exact(self):
        assert normal_cdf(-math.inf) == 0.0 and normal_cdf(math.inf) == 1.0
        assert normal_sf(math.inf) == 0.0 and normal_sf(-math.inf) == 1.0

    def test_cdf_against_mpmath(self):
        with mpmath.workdps(40):
            for z in (-9.0, -3.3, -0.5, 0.0, 1.2, 4.0, 8.5):
                ref = float(mpmath.ncdf(z))
                assert abs(float(normal_cdf(z)) - ref) <= 1e-14
                assert abs(float(normal_sf(-z)) - ref) <= 1e-14


class TestRegions:
    def test_complement_halves(self):
        d = DoubleGaussianDensity(0.4)
        total = d.region_mass([(-math.inf, 0.0)]) + d.region_mass([(0.0, math.inf)])
        assert total == pytest.approx(1.0, abs=1e-15)

    def test_symmetric_pair(self):
        d = DoubleGaussianDensity(0.4)
        assert d.region_mass([(-2, -1), (1, 2)]) == pytest.approx(2 * d.interval_mass(1, 2), abs=1e-15)

    def test_against_quadrature(self):
        d = DoubleGaussianDensity(0.4)
        ref = quad_mass(d, -0.5, 0.5) + quad_mass(d, 2.0, 3.0)
        assert abs(d.region_mass([(-0.5, 0.5), (2.0, 3.0)]) - ref) <= 1e-10

    def test_rejects_overlap(self):
        with pytest.raises(ValueError):
            check_region([(0.0, 2.0), (1.0, 3.0)])

    def test_shared_endpoint_allowed(self):
        assert check_region([(1.0, 2.0), (0.0, 1.0)]) == [(0.0, 1.0), (1.0, 2.0)]


class TestScaling:
    def test_identity_scale(self):
        d = DoubleGaussianDensity(0.3)
        r = [(-0.4, 0.2), (1.0, math.inf)]
        assert scaled_density_mass(1.0, d, r) == pytest.approx(d.region_mass(r), abs=1e-15)

    def test_half_line(self):
        assert scaled_density_mass(2.0, DoubleGaussianDensity(0.5), [(0.0, math.inf)]) == pytest.approx(0.5, abs=1e-15)

    def test_scaled_interval(self):
        d = DoubleGaussianDensity(0.16)
        assert abs(scaled_density_mass(3.0, d, [(0.2, 1.4)]) - d.region_mass([(0.2, 1.4)])) <= 1e-12

    @given(variances, st.floats(min_value=0.1, max_value=10.0), abscissae, abscissae)
    @settings(max_examples=50)
    def test_mass_invariant(self, v, b, s, t):
        d = DoubleGaussianDensity(v)
        r = [(min(s, t), max(s, t))]
        assert abs(scaled_density_mass(b, d, r) - d.region_mass(r)) <= 1e-12

    @given(variances, st.floats(min_value=0.1, max_value=10.0), abscissae, abscissae)
    @settings(max_examples=50)
    def test_perimeter_order_preserved(self, v, b, x, y):
        # the scaled density at b*x is f(x)/b, so comparisons are unchanged
        d = DoubleGaussianDensity(v)
        std = d.a * b

        def scaled_pdf(z):
            return 0.5 * (math.exp(-((z - b) / std) ** 2 / 2) + math.exp(-((z + b) / std) ** 2 / 2)) / (
                std * math.sqrt(2 * math.pi)
            )

        fx, fy = float(d.pdf(x)), float(d.pdf(y))
        if fx > 1e-200:
            assert scaled_pdf(b * x) * b == pytest.approx(fx, rel=1e-9)
        if abs(fx - fy) > 1e-9 * max(fx, fy):
            assert (fx < fy) == (scaled_pdf(b * x) < scaled_pdf(b * y))

    def test_rejects_nonpositive_scale(self):
        with pytest.raises(ValueError):
            scaled_density_mass(0.0, DoubleGaussianDensity(0.5), [(0, 1)])


class TestQuantile:
    @given(variances, st.floats(min_value=1e-6, max_value=1 - 1e-6))
    def test_inverts_tail(self, v, A):
        d = DoubleGaussianDensity(v)
        b = tail_quantile(d, A)
        assert abs(float(d.tail_mass(b)) - A) <= 1e-12

    def test_half_is_zero(self):
        assert tail_quantile(DoubleGaussianDensity(0.7), 0.5) == 0.0

    @pytest.mark.parametrize("A", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_out_of_range(self, A):
        with pytest.raises(ValueError):
            tail_quantile(DoubleGaussianDensity(0.5), A)

    def test_check_mass(self):
        assert check_mass(0.3, open_half=True) == 0.3
        with pytest.raises(ValueError):
            check_mass(0.5, open_half=True)
        with pytest.raises(ValueError):
            check_mass(1.0)
