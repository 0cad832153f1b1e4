"""Core model primitives: metric factors, decay exponents, profiles, quadrature."""

import math

import numpy as np
import pytest

import hypexterior as hx
from hypexterior.errors import IncompatibleGridError, ValidationError
from hypexterior.model import RadialGrid, RadialProfile, weighted_power_inner


def _profile_from_callable(f, fp, r0, r_max, n, decay, weight=2, meta=None):
    grid = RadialGrid.uniform(r0, r_max, n)
    return RadialProfile(grid, f(grid.nodes), fp(grid.nodes), decay, weight, meta or {})


class TestMetricFactors:
    def test_coth_at_one_matches_boundary_constant(self):
        s, c, coth = hx.metric_factors(1.0)
        e2 = math.exp(2.0)
        assert abs(coth - (e2 + 1.0) / (e2 - 1.0)) < 1e-14
        assert abs(coth - 1.313035) < 5e-7
        assert abs(s - 1.175201) < 5e-7
        assert abs(s * s - 1.381098) < 2e-6

    def test_coth_limit_at_large_r(self):
        _, _, coth = hx.metric_factors(12.0)
        assert abs(coth - 1.0) < 1e-8

    def test_nonpositive_r_rejected(self):
        with pytest.raises(ValidationError):
            hx.metric_factors(0.0)
        with pytest.raises(ValidationError):
            hx.metric_factors(-1.0)


class TestDecayExponents:
    def test_reference_values(self):
        assert abs(hx.decay_exponent_nonlinear(hx.ModelParams(2, 3.0), 1.0)
                   - (1 + math.sqrt(5)) / 2) < 1e-14
        assert abs(hx.decay_exponent_nonlinear(hx.ModelParams(3, 3.0), 1.0)
                   - (1 + math.sqrt(2.0))) < 1e-14
        assert abs(hx.decay_exponent_nonlinear(hx.ModelParams(3, 3.0), 4.0)
                   - (2 + math.sqrt(5.0)) / 2) < 1e-14

    @pytest.mark.parametrize("N", [2, 3, 4, 6])
    @pytest.mark.parametrize("lam", [0.05, 0.3, 1.0, 7.0, 50.0])
    def test_defining_relation_and_weighted_integrability(self, N, lam):
        params = hx.ModelParams(N, 1.5)
        g = hx.decay_exponent_nonlinear(params, lam)
        assert abs(lam * (g * g - (N - 1) * g) - 1.0) < 1e-12
        assert g > N - 1  # sinh^(N-1)-weighted tails stay integrable

    def test_lambda_one_identity(self):
        for N in (2, 3, 4, 5):
            g = hx.decay_exponent_nonlinear(hx.ModelParams(N, 1.5), 1.0)
            assert abs(g * g - 1.0 - (N - 1) * g) < 1e-12

    def test_linearized_matches_examples(self):
        p3 = hx.ModelParams(3, 3.0)
        assert abs(hx.decay_exponent_linearized(p3, 1.0, 0.0) - (1 + math.sqrt(2))) < 1e-14
        p2 = hx.ModelParams(2, 3.0)
        assert abs(hx.decay_exponent_linearized(p2, 1.0, 0.0)
                   - (1 + math.sqrt(5)) / 2) < 1e-14
        assert abs(hx.decay_exponent_linearized(p3, 1.0, -1.0)
                   - (2 + math.sqrt(12.0)) / 2) < 1e-14

    def test_linearized_rejects_nondecaying_shift(self):
        with pytest.raises(ValidationError):
            hx.decay_exponent_linearized(hx.ModelParams(3, 2.0), 1.0, 1.0)


class TestModelParams:
    def test_supercritical_rejected(self):
        with pytest.raises(ValidationError):
            hx.ModelParams(3, 5.0)
        with pytest.raises(ValidationError):
            hx.ModelParams(4, 3.0)

    def test_two_dimensional_any_p(self):
        hx.ModelParams(2, 9.0)

    def test_bad_inputs(self):
        with pytest.raises(ValidationError):
            hx.ModelParams(1, 2.0)
        with pytest.raises(ValidationError):
            hx.ModelParams(3, 1.0)


class TestRadialProfile:
    def test_hermite_reproduces_cubics(self):
        f = lambda r: 0.3 * r**3 - r**2 + 2.0 * r - 1.0
        fp = lambda r: 0.9 * r**2 - 2.0 * r + 2.0
        prof = _profile_from_callable(f, fp, 1.0, 5.0, 21, decay=1.0)
        r = np.linspace(1.0, 5.0, 313)
        assert np.abs(prof.evaluate(r) - f(r)).max() < 1e-12
        assert np.abs(prof.evaluate(r, derivative=True) - fp(r)).max() < 1e-12

    def test_tail_model(self):
        g = 2.0
        prof = _profile_from_callable(
            lambda r: np.exp(-g * r), lambda r: -g * np.exp(-g * r), 1.0, 10.0, 101, g
        )
        r = 13.7
        expect = math.exp(-g * 10.0) * math.exp(-g * (r - 10.0))
        assert abs(prof.evaluate(r) - expect) < 1e-15
        assert abs(prof.evaluate(r, derivative=True) + g * expect) < 1e-15

    def test_below_domain_rejected(self):
        prof = _profile_from_callable(np.cos, lambda r: -np.sin(r), 1.0, 4.0, 61, 1.0)
        with pytest.raises(ValidationError):
            prof.evaluate(0.5)

    def test_length_mismatch_rejected(self):
        grid = RadialGrid.uniform(1.0, 2.0, 11)
        with pytest.raises(ValidationError):
            RadialProfile(grid, np.zeros(10), np.zeros(11), 1.0, 2)


class TestWeightedInner:
    def test_zero_profile(self):
        prof = _profile_from_callable(
            lambda r: 0.0 * r, lambda r: 0.0 * r, 1.0, 30.0, 201, 2.0
        )
        assert hx.weighted_l2_inner(prof, prof) == 0.0

    def test_exponential_against_closed_form(self):
        # oracle: integral_1^inf sinh^2(r) e^{-2 g r} dr in closed form
        g = hx.decay_exponent_nonlinear(hx.ModelParams(3, 3.0), 1.0)
        prof = _profile_from_callable(
            lambda r: np.exp(-g * r), lambda r: -g * np.exp(-g * r), 1.0, 30.0, 4001, g
        )
        closed = (
            math.exp(-(2 * g - 2)) / (2 * g - 2)
            - 2.0 * math.exp(-2 * g) / (2 * g)
            + math.exp(-(2 * g + 2)) / (2 * g + 2)
        ) / 4.0
        assert abs(hx.weighted_l2_inner(prof, prof) - closed) < 1e-8

    def test_symmetry_on_random_profiles(self, rng):
        grid = RadialGrid.uniform(1.0, 20.0, 501)
        r = grid.nodes
        for _ in range(5):
            a, b = rng.normal(size=2)
            f = RadialProfile(grid, a * np.exp(-2 * r) * np.sin(r),
                              a * np.exp(-2 * r) * (np.cos(r) - 2 * np.sin(r)), 2.0, 2)
            g = RadialProfile(grid, b * np.exp(-2.5 * r),
                              -2.5 * b * np.exp(-2.5 * r), 2.5, 2)
            assert hx.weighted_l2_inner(f, g) == hx.weighted_l2_inner(g, f)

    def test_self_convergence_against_trapezoid_refinement(self):
        g = 2.2
        prof = _profile_from_callable(
            lambda r: np.exp(-g * r) * (1 + 0.3 * np.sin(r)),
            lambda r: np.exp(-g * r) * (0.3 * np.cos(r) - g * (1 + 0.3 * np.sin(r))),
            1.0, 30.0, 4001, g,
        )
        value = hx.weighted_l2_inner(prof, prof)
        x = np.linspace(1.0, 30.0, 64001)
        fx = prof.evaluate(x)
        trapz = np.trapezoid(np.sinh(x) ** 2 * fx * fx, x)
        from hypexterior.model import tail_weighted_integral

        assert abs(value - (trapz + tail_weighted_integral(prof, prof, 2))) < 1e-8

    def test_mismatched_grids_rejected(self):
        a = _profile_from_callable(np.exp, np.exp, 1.0, 5.0, 11, 3.0)
        b = _profile_from_callable(np.exp, np.exp, 1.0, 5.0, 13, 3.0)
        with pytest.raises(IncompatibleGridError):
            hx.weighted_l2_inner(a, b)

    def test_divergent_tail_rejected(self):
        # decay rate below the weight power: the tail integral diverges
        prof = _profile_from_callable(
            lambda r: np.exp(-0.4 * r), lambda r: -0.4 * np.exp(-0.4 * r),
            1.0, 20.0, 101, 0.4, weight=2,
        )
        with pytest.raises(ValidationError):
            weighted_power_inner(prof, prof, 2)


class TestNumericsConfig:
    def test_validation(self):
        with pytest.raises(ValidationError):
            hx.NumericsConfig(grid_points=10)
        with pytest.raises(ValidationError):
            hx.NumericsConfig(shoot_tol=0.0)
        with pytest.raises(ValidationError):
            hx.NumericsConfig(r_max=-3.0)

    def test_r_max_rule(self):
        cfg = hx.NumericsConfig()
        assert cfg.resolve_r_max(1.0, 2.0) == 31.0
        assert cfg.resolve_r_max(1.0, 0.5) == 81.0
        cfg2 = hx.NumericsConfig(r_max=40.0)
        assert cfg2.resolve_r_max(1.0, 2.0) == 40.0
        with pytest.raises(ValidationError):
            cfg2.resolve_r_max(45.0, 2.0)
