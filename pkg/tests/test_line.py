import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from dgiso.density import DoubleGaussianDensity
from dgiso.line import (
    BoundaryConfiguration,
    Sign,
    candidate_elimination_check,
    density_upper_bound_check,
    gamma_derivative,
    gamma_function_check,
    gamma_value,
    isoperimetric_profile,
    ray_for_mass,
    ray_shift_comparison,
    score,
    second_variation_test,
    sliding_interval_check,
    sliding_interval_mass,
    straddling_mass_check,
    two_point_instability_check,
    two_ray_comparison,
    two_ray_sweep,
    verify_rays_optimal,
)
from dgiso.quadrature import adaptive_simpson
from dgiso.stationary import inflection_point
from dgiso.suite import DEFAULT_MASSES, DEFAULT_VARIANCES

variances = st.sampled_from(DEFAULT_VARIANCES)
masses = st.floats(min_value=1e-4, max_value=0.4999)


class TestConfiguration:
    def test_half_line(self):
        d = DoubleGaussianDensity(0.3)
        cfg = BoundaryConfiguration.from_region(d, [(0.0, math.inf)])
        assert cfg.mass == pytest.approx(0.5, abs=1e-15)
        assert cfg.perimeter == float(d.pdf(0.0))

    def test_symmetric_interval(self):
        d = DoubleGaussianDensity(0.3)
        cfg = BoundaryConfiguration.from_region(d, [(-1.0, 1.0)])
        assert cfg.perimeter == pytest.approx(2 * float(d.pdf(1.0)), rel=1e-15)

    def test_mass_against_quadrature(self):
        d = DoubleGaussianDensity(0.16)
        cfg = BoundaryConfiguration.from_region(d, [(0.2, 0.9)])
        ref = adaptive_simpson(lambda x: float(d.pdf(x)), 0.2, 0.9, tol=1e-13)
        assert abs(cfg.mass - ref) <= 1e-10

    def test_score_is_idempotent(self):
        d = DoubleGaussianDensity(0.4)
        cfg = BoundaryConfiguration.from_region(d, [(-math.inf, -0.3), (0.2, 1.0)])
        assert score(d, cfg) == (cfg.mass, cfg.perimeter)
        assert score(d, cfg) == score(d, cfg)

    def test_mismatched_points_rejected(self):
        d = DoubleGaussianDensity(0.4)
        bad = BoundaryConfiguration((0.1,), ((0.2, math.inf),), 0.0, 0.0)
        with pytest.raises(ValueError):
            score(d, bad)

    def test_boundary_sides(self):
        d = DoubleGaussianDensity(0.4)
        cfg = BoundaryConfiguration.from_region(d, [(-math.inf, -0.3), (0.2, 1.0)])
        assert cfg.boundary_sides == (-1, 1, -1)


class TestRay:
    @pytest.mark.parametrize("v", DEFAULT_VARIANCES)
    def test_half_mass_at_origin(self, v):
        assert ray_for_mass(DoubleGaussianDensity(v), 0.5).points == (0.0,)

    def test_quarter_mass(self):
        d = DoubleGaussianDensity(0.5)
        b = ray_for_mass(d, 0.25).points[0]
        assert abs(d.interval_mass(b, math.inf) - 0.25) <= 1e-12
        # independent quadrature of the tail
        assert abs(quad(lambda x: float(d.pdf(x)), b, math.inf, epsabs=1e-14)[0] - 0.25) <= 1e-10

    @given(variances, masses)
    def test_complement_symmetry(self, v, A):
        d = DoubleGaussianDensity(v)
        r1, r2 = ray_for_mass(d, A), ray_for_mass(d, 1 - A)
        assert abs(r1.points[0] + r2.points[0]) <= 1e-10
        assert abs(r1.perimeter - r2.perimeter) <= 1e-10

    @pytest.mark.parametrize("A", [0.0, 1.0, 1.2])
    def test_rejects_out_of_range(self, A):
        with pytest.raises(ValueError):
            ray_for_mass(DoubleGaussianDensity(0.5), A)

    @pytest.mark.parametrize("v", DEFAULT_VARIANCES)
    def test_profile_shape(self, v):
        d = DoubleGaussianDensity(v)
        grid = np.linspace(0.001, 0.999, 999)
        rows = isoperimetric_profile(d, grid)
        points = np.array([r[1] for r in rows])
        perims = np.array([r[2] for r in rows])
        assert np.all(np.diff(points) < 0)
        # continuous, and its maximum is interior
        assert np.max(np.abs(np.diff(perims))) < 0.05
        i = int(np.argmax(perims))
        assert 0 < i < len(grid) - 1


class TestSecondVariation:
    def test_both_concave_points_unstable(self):
        d = DoubleGaussianDensity(0.5)
        c = inflection_point(d)
        cfg = BoundaryConfiguration.from_region(d, [(-c - 0.5, c + 0.5)])
        res = second_variation_test(d, cfg)
        assert res.second_variation_sign is Sign.NEGATIVE and res.unstable
        f = d.pdf(np.array(cfg.points))
        np.testing.assert_allclose(res.witness_velocity, [1 / f[0], 1 / f[1]], rtol=1e-14)
        assert abs(res.constraint_residual) <= 1e-12

    def test_both_convex_points_stable(self):
        d = DoubleGaussianDensity(0.16)
        c = inflection_point(d)
        cfg = BoundaryConfiguration.from_region(d, [(-0.5 * c, 0.5 * c)])
        assert second_variation_test(d, cfg).second_variation_sign is Sign.POSITIVE

    def test_two_ray_witness_preserves_volume(self):
        d = DoubleGaussianDensity(0.5)
        cfg = BoundaryConfiguration.from_region(d, [(-math.inf, -1.5), (1.5, math.inf)])
        res = second_variation_test(d, cfg)
        f = d.pdf(np.array(cfg.points))
        eps = np.array(cfg.boundary_sides)
        assert abs(np.sum(f * np.array(res.witness_velocity) * eps)) <= 1e-12
        assert res.unstable

    @given(
        st.floats(min_value=0.05, max_value=2.0),
        st.lists(st.floats(min_value=-4, max_value=4), min_size=2, max_size=5, unique=True),
        st.booleans(),
    )
    @settings(max_examples=80)
    def test_witness_constraint_and_value(self, v, pts, starts_inside):
        pts = sorted(pts)
        if min(np.diff(pts)) < 1e-3:
            return
        d = DoubleGaussianDensity(v)
        edges = ([-math.inf] if starts_inside else []) + pts
        if len(edges) % 2:
            edges.append(math.inf)
        cfg = BoundaryConfiguration.from_region(d, list(zip(edges[0::2], edges[1::2])))
        res = second_variation_test(d, cfg)
        p = np.array(cfg.points)
        f, w = d.pdf(p), d.pdf(p) * d.psi_second(p)
        u = np.array(res.witness_velocity)
        eps = np.array(cfg.boundary_sides)
        scale = np.abs(f * u).sum()
        assert abs(np.sum(f * u * eps)) <= 1e-12 * max(1.0, scale)
        form = float(np.sum(w * u * u))
        if res.second_variation_sign is Sign.NEGATIVE:
            assert form < 0
        if res.second_variation_sign is Sign.POSITIVE:
            assert form > 0
        # a definite diagonal form fixes the sign on every subspace
        if np.all(w > 0):
            assert res.second_variation_sign is Sign.POSITIVE
        if np.all(w < 0):
            assert res.second_variation_sign is Sign.NEGATIVE
        if len(p) >= 3:
            # the witness minimises the form over unit volume-preserving directions
            n = f * eps / np.linalg.norm(f * eps)
            rng = np.random.default_rng(len(p))
            for r in rng.standard_normal((50, len(p))):
                r = r - (r @ n) * n
                r /= np.linalg.norm(r)
                assert float(np.sum(w * r * r)) >= res.value - 1e-9 * np.abs(w).max()

    def test_rejects_single_point(self):
        d = DoubleGaussianDensity(0.5)
        with pytest.raises(ValueError):
            second_variation_test(d, ray_for_mass(d, 0.2))


class TestGamma:
    @pytest.mark.parametrize("v", [0.1, 0.25, 0.3, 0.4, 0.5])
    def test_check_passes(self, v):
        rep = gamma_function_check(DoubleGaussianDensity(v))
        assert rep.passed, rep.witnesses
        assert rep.witnesses["gamma_prime_sign_changes"] == 1

    @given(st.floats(min_value=0.02, max_value=1.0))
    def test_vanishes_at_half(self, v):
        assert float(gamma_value(DoubleGaussianDensity(v), 0.5)) == 0.0

    def test_derivative_matches_finite_difference(self):
        d = DoubleGaussianDensity(0.3)
        for s in (0.05, 0.2, 0.45):
            h = 1e-6
            fd = float(gamma_value(d, s + h) - gamma_value(d, s - h)) / (2 * h)
            assert abs(float(gamma_derivative(d, s)) - fd) <= 1e-6

    def test_rejects_large_variance(self):
        with pytest.raises(ValueError):
            gamma_function_check(DoubleGaussianDensity(0.6))


class TestSlidingInterval:
    def test_definition(self):
        d = DoubleGaussianDensity(0.3)
        assert sliding_interval_mass(d, 0.5) == d.interval_mass(-0.5, 0.5)

    @pytest.mark.parametrize("v", [0.05, 0.16, 0.25, 0.4, 0.5])
    def test_check_passes(self, v):
        rep = sliding_interval_check(DoubleGaussianDensity(v))
        assert rep.passed, rep.witnesses
        assert rep.witnesses["quarter_minus_I_at_0"] > 0


class TestComparisons:
    @pytest.mark.parametrize("v,s,t", [(0.16, -0.3, 0.3), (0.4, -0.1, 0.5), (0.16, 0.2, 0.2 + 1e-6)])
    def test_two_ray_comparison(self, v, s, t):
        rep = two_ray_comparison(DoubleGaussianDensity(v), s, t)
        assert rep.passed, rep.witnesses
        w = rep.witnesses
        assert w["h_mass"] == pytest.approx(w["A"], abs=1e-12)
        assert w["left_end"] <= t and w["right_end"] >= 2 + s

    def test_two_ray_rejects_bad_interval(self):
        with pytest.raises(ValueError):
            two_ray_comparison(DoubleGaussianDensity(0.3), 0.5, 0.2)

    @pytest.mark.parametrize("v", [0.05, 0.16, 0.25, 0.4, 0.5])
    def test_two_ray_sweep(self, v):
        rep = two_ray_sweep(DoubleGaussianDensity(v))
        assert rep.passed and rep.witnesses["min_gap"] > 0

    def test_ray_shift_quarter(self):
        rep = ray_shift_comparison(DoubleGaussianDensity(0.3), 0.25)
        assert rep.witnesses["s"] == 1.0 and rep.passed

    @pytest.mark.parametrize("v,A", [(0.5, 0.1), (0.16, 0.2), (0.05, 0.02)])
    def test_ray_shift(self, v, A):
        rep = ray_shift_comparison(DoubleGaussianDensity(v), A)
        assert rep.passed
        assert rep.witnesses["t"] > rep.witnesses["s"] >= 1.0
        assert rep.witnesses["h_mass_of_s_ray"] == pytest.approx(A, abs=1e-14)

    @pytest.mark.parametrize("v", [0.5, 0.6, 0.75, 0.9, 0.99])
    def test_density_upper_bound(self, v):
        rep = density_upper_bound_check(DoubleGaussianDensity(v))
        assert rep.passed, rep.witnesses
        assert rep.witnesses["max_f"] <= 0.345


class TestRaysOptimal:
    @pytest.mark.parametrize("v,A", [(1.0, 0.3), (0.5, 0.25), (0.16, 0.45)])
    def test_ray_wins(self, v, A):
        rep = verify_rays_optimal(DoubleGaussianDensity(v), A)
        assert rep.passed, rep.witnesses["counterexamples"]
        assert rep.witnesses["candidates"][0]["tag"] == "SingleRay"

    def test_unit_variance_has_no_stable_multi_point_candidate(self):
        rep = verify_rays_optimal(DoubleGaussianDensity(1.0), 0.3)
        assert all(r["stability"] in (None, "negative") for r in rep.witnesses["candidates"])

    @pytest.mark.parametrize("v", [0.16, 0.5, 1.0])
    def test_elimination(self, v):
        for A in (0.04, 0.2, 0.36, 0.48):
            rep = candidate_elimination_check(DoubleGaussianDensity(v), A)
            assert rep.passed, rep.witnesses["survivors"]

    def test_unreachable_tolerance_fails(self):
        rep = verify_rays_optimal(DoubleGaussianDensity(0.5), 0.1, mass_tol=1e-30)
        assert not rep.passed and rep.witnesses["rejected_roots"]

    def test_ray_residual_checked(self):
        rep = verify_rays_optimal(DoubleGaussianDensity(0.5), 0.1, root_tol=1e-300)
        assert rep.witnesses["ray_mass_residual"] <= 1e-12
        assert rep.passed == (rep.witnesses["ray_mass_residual"] <= 1e-300)

    @pytest.mark.parametrize("v", [0.05, 0.16, 0.25, 0.4, 0.5])
    def test_straddling_mass_bound(self, v):
        rep = straddling_mass_check(DoubleGaussianDensity(v))
        assert rep.passed and rep.witnesses["largest_straddling_mass"] <= 0.25

    @pytest.mark.parametrize("v", [1.0, 1.25, 1.5, 2.25])
    def test_two_point_instability(self, v):
        rep = two_point_instability_check(DoubleGaussianDensity(v), DEFAULT_MASSES[::4])
        assert rep.passed, rep.witnesses["stable"]
