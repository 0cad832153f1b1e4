"""Ground-state solvers: shooting, the collocation oracle, rescaling, U."""

import math

import numpy as np
import pytest

import hypexterior as hx
from hypexterior.errors import NoBracketError, OracleFailureError, ValidationError
from hypexterior.radial import UNDERSHOOT, OVERSHOOT, fd_whole_space_oracle


class TestShooting:
    def test_boundary_value_and_peak(self, w_n3p3_R1, params_n3p3):
        prof = w_n3p3_R1.profile
        assert prof.values[0] == 0.0
        assert prof.values.max() >= math.sqrt(2.0)
        assert w_n3p3_R1.residual_sup <= 1e-9

    def test_bracket_history_has_both_classes(self, w_n3p3_R1):
        labels = {c for _, c in w_n3p3_R1.bracket_history}
        assert labels == {UNDERSHOOT, OVERSHOOT}

    def test_interior_positivity(self, w_n3p3_R1):
        interior = w_n3p3_R1.profile.values[1:]
        assert interior.min() > 0.0

    def test_invalid_radius(self, params_n3p3):
        with pytest.raises(ValidationError):
            hx.solve_exterior_ground_state(params_n3p3, -1.0)

    def test_no_bracket_reported(self, params_n3p3):
        cfg = hx.NumericsConfig(grid_points=2001, max_bisect=1)
        with pytest.raises(NoBracketError):
            hx.solve_exterior_ground_state(params_n3p3, 1.0, cfg)

    def test_hard_overdamped_case(self, cfg_mid):
        # N=4, p=2 has slope ~95 and a critically damped far field
        params = hx.ModelParams(4, 2.0)
        res = hx.solve_exterior_ground_state(params, 0.5, cfg_mid)
        assert res.profile.values.max() >= params.peak_lower_bound
        assert res.residual_sup <= 1e-8


class TestOracleAgreement:
    @pytest.mark.parametrize("N,p,R", [(3, 3.0, 1.0), (2, 3.0, 2.0)])
    def test_sup_norm_agreement(self, N, p, R, cfg_mid):
        params = hx.ModelParams(N, p)
        shoot = hx.solve_exterior_ground_state(params, R, cfg_mid)
        oracle = hx.fd_bvp_oracle(params, R, cfg_mid)
        diff = shoot.profile.evaluate(oracle.grid.nodes) - oracle.values
        assert np.abs(diff).max() < 1e-5

    def test_slope_and_peak_pinned_by_oracle(self, params_n3p3, w_n3p3_R1, cfg_mid):
        # Richardson-extrapolate the oracle's boundary slope over a grid pair
        def oracle_slope_peak(n):
            prof = hx.fd_bvp_oracle(params_n3p3, 1.0, cfg_mid.with_(grid_points=n))
            h = prof.grid.nodes[1] - prof.grid.nodes[0]
            slope = (-3 * prof.values[0] + 4 * prof.values[1] - prof.values[2]) / (2 * h)
            return slope, prof.values.max()

    # two resolutions, h^2 extrapolation
        s1, m1 = oracle_slope_peak(cfg_mid.grid_points)
        s2, m2 = oracle_slope_peak(2 * cfg_mid.grid_points - 1)
        slope_x = (4 * s2 - s1) / 3
        peak_x = (4 * m2 - m1) / 3
        assert abs(w_n3p3_R1.slope_star - slope_x) / slope_x < 1e-6
        assert abs(w_n3p3_R1.profile.values.max() - peak_x) / peak_x < 1e-6

    def test_zero_guess_is_oracle_failure(self, params_n3p3, cfg_mid):
        n = cfg_mid.grid_points
        with pytest.raises(OracleFailureError):
            hx.fd_bvp_oracle(params_n3p3, 1.0, cfg_mid, initial_guess=np.zeros(n))


class TestRescaling:
    def test_lambda_metadata_and_boundary(self, w_n3p3_R1):
        u = hx.rescale_to_unit(w_n3p3_R1, 1.0)
        assert u.meta["lam"] == 1.0
        assert u.values[0] == 0.0

    def test_lambda_value(self, params_n3p3, cfg_mid):
        res = hx.solve_exterior_ground_state(params_n3p3, 2.0, cfg_mid)
        u = hx.rescale_to_unit(res, 2.0)
        assert u.meta["lam"] == 0.25
        assert u.r0 == 1.0

    def test_range_preserved(self, w_n3p3_R1):
        u = hx.rescale_to_unit(w_n3p3_R1, 1.0)
        assert abs(u.values.max() - w_n3p3_R1.profile.values.max()) < 1e-8

    def test_scaling_consistency_two_paths(self, params_n3p3, cfg_mid):
        # solving at R then rescaling equals shooting the pulled-back form
        R = 2.0
        res = hx.solve_exterior_ground_state(params_n3p3, R, cfg_mid)
        u_rescaled = hx.rescale_to_unit(res, R)
        u_direct = hx.ground_state_scaled(params_n3p3, 1.0 / R**2, cfg_mid)
        x = u_rescaled.grid.nodes
        diff = u_direct.profile.evaluate(x) - u_rescaled.values
        assert np.abs(diff).max() < 1e-7


class TestLambdaDerivative:
    def test_boundary_and_critical_point(self, params_n3p3, u_n3p3_lam1):
        from scipy.optimize import brentq

        du = hx.lambda_derivative(u_n3p3_lam1)
        lam = u_n3p3_lam1.meta["lam"]
        expect = -u_n3p3_lam1.derivatives[0] * 1.0 / (2.0 * lam)
        assert abs(du.values[0] - expect) < 1e-14
        r_peak, _ = hx.profile_shape_check(u_n3p3_lam1, params_n3p3)
        r_c = brentq(lambda r: u_n3p3_lam1.evaluate(r, derivative=True),
                     r_peak - 0.05, r_peak + 0.05)
        assert abs(du.evaluate(r_c)) < 1e-4 * np.abs(du.values).max()

    def test_central_difference_convergence(self, u_n3p3_lam1):
        # the derivative formula is exact for the rescaling family at frozen
        # profile shape: u_sigma(r) = u_lam(r sqrt(lam/sigma)); central
        # differences of that family must converge at O(h^2)
        lam = 1.0
        du = hx.lambda_derivative(u_n3p3_lam1)
        radii = np.linspace(1.1, 12.0, 20)

        def central_error(h):
            up = u_n3p3_lam1.evaluate(radii * math.sqrt(lam / (lam + h)))
            dn = u_n3p3_lam1.evaluate(radii * math.sqrt(lam / (lam - h)))
            return np.abs((up - dn) / (2 * h) - du.evaluate(radii)).max()

        e1 = central_error(1e-3 * lam)
        e2 = central_error(5e-4 * lam)
        assert e1 < 1e-5          # O(h^2) scale at h = 1e-3
        assert e2 < 0.3 * e1      # and it shrinks at second order

    def test_full_family_derivative_differs(self, params_n3p3, cfg_mid, u_n3p3_lam1):
        # solving fresh ground states at lambda +- h measures the full-family
        # derivative, which includes the R-dependence of the profile shape;
        # the rescaling formula intentionally omits that term, and the gap is
        # order one (the chain rule in the lambda = 1/R^2 scaling is not exact
        # in hyperbolic space)
        lam, h = 1.0, 1e-3
        du = hx.lambda_derivative(u_n3p3_lam1)
        r = np.array([1.1, 2.0, 3.0])
        banks = {}
        for lam_s in (lam + h, lam - h):
            R = lam_s ** -0.5
            res = hx.solve_exterior_ground_state(params_n3p3, R, cfg_mid)
            banks[lam_s] = hx.rescale_to_unit(res, R)
        fd = (banks[lam + h].evaluate(r) - banks[lam - h].evaluate(r)) / (2 * h)
        assert np.abs(fd - du.evaluate(r)).max() > 0.1


class TestWholeSpace:
    def test_shape_and_oracle(self, params_n3p3, cfg_mid):
        U = hx.solve_whole_space_ground_state(params_n3p3, cfg_mid)
        # U'(r0) follows the series 2 c r0, vanishing at the center scale
        a = U.meta["center_value"]
        c = (a - a**params_n3p3.p) / (2 * params_n3p3.N)
        assert abs(U.derivatives[0] - 2 * c * 1e-6) < 1e-10
        assert abs(U.derivatives[0]) < 1e-3
        assert np.all(np.diff(U.values) < 1e-10)     # decreasing
        # center value pinned by the collocation oracle (grid-pair extrapolated)
        o1 = fd_whole_space_oracle(params_n3p3, cfg_mid)
        o2 = fd_whole_space_oracle(params_n3p3, cfg_mid.with_(grid_points=2 * cfg_mid.grid_points - 1))
        center_x = (4 * o2.meta["center_value"] - o1.meta["center_value"]) / 3
        assert abs(U.meta["center_value"] - center_x) / center_x < 1e-6
        # compare fields against the h^2-extrapolated oracle (its raw O(h^2)
        # bias at this resolution is ~2e-5)
        field_x = (4 * o2.values[::2] - o1.values) / 3
        inside = o1.grid.nodes >= U.r0
        diff = U.evaluate(o1.grid.nodes[inside]) - field_x[inside]
        assert np.abs(diff).max() < 1e-5


class TestConvergenceStudy:
    def test_single_radius_degenerate(self, params_n3p3, cfg_mid):
        rows = hx.convergence_study(params_n3p3, [1.0], cfg_mid)
        assert len(rows) == 1 and rows[0][1] >= 0.0

    def test_two_radii_decrease(self, params_n3p3, cfg_mid):
        rows = hx.convergence_study(params_n3p3, [1.0, 0.5], cfg_mid)
        assert rows[1][1] < rows[0][1]

    def test_bad_radii(self, params_n3p3):
        with pytest.raises(ValidationError):
            hx.convergence_study(params_n3p3, [0.5, 1.0])


class TestCache:
    def test_memoization_and_hint_reuse(self, params_n3p3, cfg_mid):
        cache = hx.GroundStateCache(params_n3p3, cfg_mid)
        a = cache(1.0)
        b = cache(1.0)
        assert a is b
        c = cache(1.1)  # warm-started from the lambda = 1 slope
        assert c.meta["lam"] == 1.1

    def test_concurrent_reads(self, params_n3p3, cfg_mid):
        from concurrent.futures import ThreadPoolExecutor

        cache = hx.GroundStateCache(params_n3p3, cfg_mid)
        with ThreadPoolExecutor(max_workers=4) as pool:
            out = list(pool.map(cache, [0.8, 0.8, 1.25, 1.25]))
        assert out[0] is out[1] and out[2] is out[3]
