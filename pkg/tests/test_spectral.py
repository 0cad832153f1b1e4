"""Radial spectra, quadratic forms, and the two integral inequalities."""

import math

import numpy as np
import pytest

import hypexterior as hx
from hypexterior.errors import MorseIndexViolationError, ValidationError
from hypexterior.model import RadialGrid, RadialProfile, weighted_power_inner
from hypexterior.spectral import (
    ModeFunction,
    dirichlet_mode_eigenpair,
    lambda0_bound_fixed_point,
    proof_constant,
    quadratic_form_Q,
    quadratic_form_Qtilde,
    radial_spectrum,
    sturm_negative_count,
)

MU_ICOSA = 42.0  # first invariant eigenvalue 6*(6+1) of the icosahedral group


@pytest.fixture(scope="module")
def cache(params_n3p3, cfg_mid):
    return hx.GroundStateCache(params_n3p3, cfg_mid)


@pytest.fixture(scope="module")
def pairs_lam1(u_n3p3_lam1, params_n3p3, cfg_mid):
    return radial_spectrum(u_n3p3_lam1, params_n3p3, n_eigs=3, cfg=cfg_mid)


class TestRadialSpectrum:
    def test_unique_negative_eigenvalue(self, pairs_lam1):
        assert pairs_lam1[0].eigenvalue < 0.0
        assert pairs_lam1[1].eigenvalue > 0.0
        assert pairs_lam1[2].eigenvalue > pairs_lam1[1].eigenvalue

    def test_doubling_stability(self, pairs_lam1):
        p0 = pairs_lam1[0]
        assert abs(p0.eigenvalue_coarse - p0.eigenvalue_fine) / abs(p0.eigenvalue) < 1e-6

    def test_ground_eigenfunction_positive_normalized(self, pairs_lam1):
        z = pairs_lam1[0].eigenfunction
        half = len(z.grid) // 2
        assert z.values[1:half].min() > 0.0            # strictly positive bulk
        assert z.values.min() > -1e-12 * z.values.max()  # tail noise floor only
        assert abs(hx.weighted_l2_inner(z, z) - 1.0) < 1e-10

    def test_morse_violation_when_no_negative(self, u_n3p3_lam1, params_n3p3, cfg_mid):
        faint = RadialProfile(
            u_n3p3_lam1.grid, 0.05 * u_n3p3_lam1.values, 0.05 * u_n3p3_lam1.derivatives,
            u_n3p3_lam1.decay_exponent, u_n3p3_lam1.weight_power, dict(u_n3p3_lam1.meta),
        )
        with pytest.raises(MorseIndexViolationError):
            radial_spectrum(faint, params_n3p3, cfg=cfg_mid)

    def test_sturm_count_matches_eigensolve(self):
        d = np.array([2.0, -1.0, 0.5, -3.0, 4.0])
        e = np.array([0.3, 0.2, 0.1, 0.4])
        vals = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
        assert sturm_negative_count(d, e, 0.0) == int((vals < 0).sum())
        assert sturm_negative_count(d, e, 1.0) == int((vals < 1.0).sum())

    def test_w_side_matrix_morse_one(self, w_n2p3_R1, params_n2p3, cfg_mid):
        pairs = radial_spectrum(w_n2p3_R1.profile, params_n2p3, cfg=cfg_mid)
        assert pairs[0].eigenvalue < 0.0 < pairs[1].eigenvalue


class TestQuadraticForms:
    def test_rayleigh_identity(self, pairs_lam1, u_n3p3_lam1, params_n3p3):
        z = pairs_lam1[0].eigenfunction
        Q = quadratic_form_Q(ModeFunction(z, 0), u_n3p3_lam1, params_n3p3)
        nrm = hx.weighted_l2_inner(z, z)
        assert abs(Q / nrm - pairs_lam1[0].eigenvalue) < 5e-7  # O(h^2) at this grid

    def test_separated_identity_matches_mu_shift(self, pairs_lam1, u_n3p3_lam1, params_n3p3):
        z = pairs_lam1[0].eigenfunction
        tau0 = pairs_lam1[0].eigenvalue
        Q6 = quadratic_form_Q(ModeFunction(z, 6), u_n3p3_lam1, params_n3p3)
        lam = u_n3p3_lam1.meta["lam"]
        shifted = tau0 * hx.weighted_l2_inner(z, z) + lam * MU_ICOSA * weighted_power_inner(z, z, 0)
        assert abs(Q6 - shifted) < 5e-7

    def test_scaling_homogeneity(self, pairs_lam1, u_n3p3_lam1, params_n3p3):
        z = pairs_lam1[0].eigenfunction
        z2 = RadialProfile(z.grid, 2.0 * z.values, 2.0 * z.derivatives,
                           z.decay_exponent, z.weight_power, dict(z.meta))
        Q1 = quadratic_form_Q(ModeFunction(z, 6), u_n3p3_lam1, params_n3p3)
        Q2 = quadratic_form_Q(ModeFunction(z2, 6), u_n3p3_lam1, params_n3p3)
        assert abs(Q2 - 4.0 * Q1) < 1e-9 * abs(Q1)

    def test_trace_precondition(self, u_n3p3_lam1, params_n3p3):
        grid = u_n3p3_lam1.grid
        r = grid.nodes
        bad = RadialProfile(grid, np.exp(-2.0 * (r - 1.0)), -2.0 * np.exp(-2.0 * (r - 1.0)),
                            2.0, 2)
        with pytest.raises(ValidationError):
            quadratic_form_Q(ModeFunction(bad, 6), u_n3p3_lam1, params_n3p3)

    def test_qtilde_equals_q_on_trace_zero(self, pairs_lam1, u_n3p3_lam1, params_n3p3):
        z = pairs_lam1[0].eigenfunction
        mf = ModeFunction(z, 6)
        assert quadratic_form_Qtilde(mf, u_n3p3_lam1, params_n3p3) == \
            quadratic_form_Q(mf, u_n3p3_lam1, params_n3p3)

    def test_qtilde_boundary_coefficient_n2(self, w_n2p3_R1, params_n2p3):
        # subtraction coefficient at N = 2 is lam * 1.313035 * sinh(1)
        u = hx.rescale_to_unit(w_n2p3_R1, 1.0)
        grid = u.grid
        r = grid.nodes
        psi = RadialProfile(grid, np.exp(-(r - 1.0)), -np.exp(-(r - 1.0)), 1.0, 1)
        mf = ModeFunction(psi, 3)
        from hypexterior.spectral import _form_integrals

        qt = quadratic_form_Qtilde(mf, u, params_n2p3)
        raw = _form_integrals(mf, u, params_n2p3)
        assert abs((raw - qt) - 1.0 * 1.313035 * math.sinh(1.0)) < 5e-6

    def test_proof_constant_below_one(self):
        c = proof_constant()
        assert abs(c - 0.9848) < 1e-4
        assert c < 1.0


class TestLambdaZeroBound:
    def test_formula(self):
        assert abs(hx.lambda0_lower_bound(-1.0, 6.0) - math.sinh(1.0) ** 2 / 6.0) < 1e-12
        assert abs(hx.lambda0_lower_bound(-1.0, 6.0) - 0.230183) < 5e-7

    def test_positive_and_sign_checks(self):
        assert hx.lambda0_lower_bound(-3.7, 42.0) > 0.0
        with pytest.raises(ValidationError):
            hx.lambda0_lower_bound(1.0, 6.0)
        with pytest.raises(ValidationError):
            hx.lambda0_lower_bound(-1.0, -6.0)

    def test_composed_with_eigensolve(self, pairs_lam1):
        bound = hx.lambda0_lower_bound(pairs_lam1[0].eigenvalue, MU_ICOSA)
        assert 0.3 < bound < 0.5  # tau0(1) ~ -12.26 for the reference config

    def test_fixed_point_iteration(self, params_n3p3, cfg_mid, cache):
        bound, history = lambda0_bound_fixed_point(params_n3p3, MU_ICOSA, cache, cfg_mid)
        assert len(history) == 3
        assert abs(history[-1] - history[-2]) < 0.02 * history[-1]
        assert 0.3 < bound < 0.5


class TestModeThresholdWitness:
    def test_negative_direction_near_bound(self, params_n3p3, cfg_mid, cache, pairs_lam1):
        # at lambda slightly above the (loose) threshold bound the mode
        # operator still has a trace-zero negative direction: the witness
        bound = hx.lambda0_lower_bound(pairs_lam1[0].eigenvalue, MU_ICOSA)
        lam = 1.05 * bound
        u = cache(lam)
        nus, wfn = dirichlet_mode_eigenpair(u, params_n3p3, 6, cfg_mid)
        assert nus[0] < 0.0
        Q = quadratic_form_Q(ModeFunction(wfn, 6), u, params_n3p3)
        assert Q < 0.0
        assert abs(Q - nus[0]) < 1e-3 * abs(nus[0])
        qt = quadratic_form_Qtilde(ModeFunction(wfn, 6), u, params_n3p3)
        assert qt == Q  # trace-zero witness lies in the constrained set


def _random_bump_profile(rng, grid, decay, weight=2, vanish_left=True):
    r = grid.nodes
    c = rng.uniform(r[0] + 1.0, r[0] + 6.0)
    wdt = rng.uniform(0.4, 1.5)
    vals = np.exp(-((r - c) / wdt) ** 2)
    if vanish_left:
        vals *= 1.0 - np.exp(-3.0 * (r - r[0]))
    vals *= np.exp(-decay * np.maximum(r - c, 0.0) * 0.0 + 0.0)  # compactly dominated
    d = np.gradient(vals, r, edge_order=2)
    return RadialProfile(grid, vals, d, decay, weight)


class TestPositivitySweep:
    def test_qtilde_positive_at_large_lambda(self, params_n3p3, cfg_mid, cache, rng):
        # randomized trial functions obeying the constraints find no negative
        # value of the boundary-relaxed form at lambda = 20
        lam = 20.0
        u = cache(lam)
        pairs = radial_spectrum(u, params_n3p3, n_eigs=1, cfg=cfg_mid, enforce_morse=False)
        z = pairs[0].eigenfunction
        degrees = [0, 6, 10]
        worst = np.inf
        for _ in range(50):
            total = 0.0
            for deg in degrees:
                raw = _random_bump_profile(rng, u.grid, decay=2.0)
                amp = rng.normal()
                vals = amp * raw.values
                if deg == 0:
                    # orthogonalize against z and keep the trace zero
                    zz = z.evaluate(u.grid.nodes)
                    prof0 = RadialProfile(u.grid, vals, amp * raw.derivatives, 2.0, 2)
                    zprof = RadialProfile(u.grid, zz, z.evaluate(u.grid.nodes, derivative=True),
                                          z.decay_exponent, 2)
                    coef = hx.weighted_l2_inner(prof0, zprof)
                    vals = vals - coef * zz
                d = np.gradient(vals, u.grid.nodes, edge_order=2)
                prof = RadialProfile(u.grid, vals, d, 2.0, 2)
                total += quadratic_form_Qtilde(ModeFunction(prof, deg), u, params_n3p3)
            worst = min(worst, total)
        assert worst > 0.0


class TestWeightedBoundaryInequality:
    @staticmethod
    def _smooth_bump(rng, N):
        a = rng.uniform(0.5, 3.0)
        b = a + rng.uniform(1.0, 6.0)
        grid = RadialGrid.uniform(a, b, 2001)
        t = (grid.nodes - a) / (b - a)
        vals = np.zeros_like(t)
        inner = (t > 0) & (t < 1)
        vals[inner] = np.exp(-1.0 / (t[inner] * (1.0 - t[inner])))
        vals *= rng.uniform(0.5, 3.0) / vals.max()
        d = np.gradient(vals, grid.nodes, edge_order=2)
        return RadialProfile(grid, vals, d, 1.0, N - 1)

    def test_zero_function(self):
        grid = RadialGrid.uniform(1.0, 5.0, 101)
        g = RadialProfile(grid, np.zeros(101), np.zeros(101), 1.0, 2)
        lhs, rhs = hx.weighted_boundary_inequality_check(g, 3, 4.0, 2.0)
        assert lhs == 0.0 and rhs == 0.0

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_randomized_trials(self, N, rng):
        lam_w = 4.0 * (N - 1.0) / 3.0
        ratios = []
        for _ in range(40):
            g = self._smooth_bump(rng, N)
            r_test = rng.uniform(g.r0, g.r0 + 0.7 * (g.r_max - g.r0))
            lhs, rhs = hx.weighted_boundary_inequality_check(g, N, lam_w, r_test)
            if rhs > 0:
                ratios.append(lhs / rhs)
        assert max(ratios) <= 1.0


class TestTraceInequality:
    def test_zero_modes(self, params_n3p3):
        grid = RadialGrid.uniform(1.0, 10.0, 201)
        zero = RadialProfile(grid, np.zeros(201), np.zeros(201), 1.0, 2)
        lhs, rhs = hx.trace_inequality_check([ModeFunction(zero, 6)], 1.0, params_n3p3)
        assert lhs == 0.0 and rhs == 0.0

    def test_randomized_single_mode(self, params_n3p3, rng):
        R = 1.0
        for _ in range(40):
            grid = RadialGrid.uniform(R, R + 20.0, 1501)
            r = grid.nodes
            decay = rng.uniform(1.5, 3.0)
            vals = (1.0 + rng.uniform(-0.5, 2.0) * (r - R)) * np.exp(-decay * (r - R))
            d = np.gradient(vals, r, edge_order=2)
            prof = RadialProfile(grid, vals, d, decay, 2)
            lhs, rhs = hx.trace_inequality_check([ModeFunction(prof, 6)], R, params_n3p3)
            assert lhs <= rhs + 1e-8

    def test_mode_below_threshold_rejected(self, params_n3p3):
        grid = RadialGrid.uniform(1.0, 10.0, 201)
        r = grid.nodes
        prof = RadialProfile(grid, np.exp(-2 * (r - 1)), -2 * np.exp(-2 * (r - 1)), 2.0, 2)
        with pytest.raises(ValidationError):
            hx.trace_inequality_check([ModeFunction(prof, 1)], 1.0, params_n3p3)
