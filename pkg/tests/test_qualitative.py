"""The four qualitative-lemma checks as executable assertions."""

import math

import numpy as np
import pytest

import hypexterior as hx
from hypexterior.errors import LemmaViolationError, ValidationError
from hypexterior.model import RadialGrid, RadialProfile
from hypexterior.qualitative import (
    ALWAYS_NEGATIVE,
    ONE_SIGN_CHANGE,
    decay_rate_upper_bound,
    qualitative_report,
)


class TestGSign:
    def test_two_dimensional_always_negative(self):
        pat = hx.analyze_G_sign(hx.ModelParams(2, 3.0), 1.0)
        assert pat.kind == ALWAYS_NEGATIVE and pat.change_point is None

    def test_three_dimensional_small_radius_changes_sign(self):
        # coth^2(R) large enough turns the factor positive at the boundary
        pat = hx.analyze_G_sign(hx.ModelParams(3, 2.0), 0.3)
        assert pat.kind == ONE_SIGN_CHANGE
        assert 0.3 < pat.change_point < 1.0

    def test_three_dimensional_larger_radius_negative(self):
        pat = hx.analyze_G_sign(hx.ModelParams(3, 2.0), 0.5)
        assert pat.kind == ALWAYS_NEGATIVE

    def test_pattern_stable_under_refinement(self):
        for params, R in ((hx.ModelParams(3, 2.0), 0.3), (hx.ModelParams(2, 3.0), 1.0),
                          (hx.ModelParams(4, 1.5), 0.5)):
            coarse = hx.analyze_G_sign(params, R, r_samples=200)
            fine = hx.analyze_G_sign(params, R, r_samples=800)
            assert coarse.kind == fine.kind
            if coarse.change_point is not None:
                assert abs(coarse.change_point - fine.change_point) < 1e-9


class TestDecayRate:
    def test_reference_rates(self, w_n2p3_R1, w_n3p3_R1):
        for res, params in ((w_n2p3_R1, hx.ModelParams(2, 3.0)),
                            (w_n3p3_R1, hx.ModelParams(3, 3.0))):
            prof = res.profile
            rate = hx.estimate_decay_rate(prof, (prof.r_max - 10.0, prof.r_max - 2.0))
            gamma = hx.decay_exponent_nonlinear(params, 1.0)
            assert abs(rate - gamma) < 1e-2

    def test_upper_bound_everywhere(self, w_n3p3_R1, params_n3p3):
        prof = w_n3p3_R1.profile
        mask = prof.values > 0.0
        ratio = -prof.derivatives[mask] / prof.values[mask]
        assert ratio.max() < decay_rate_upper_bound(params_n3p3)

    def test_window_with_zero_rejected(self, w_n3p3_R1):
        prof = w_n3p3_R1.profile
        with pytest.raises(ValidationError):
            hx.estimate_decay_rate(prof, (prof.r0 - 0.5, prof.r0 + 3.0))


class TestEnergy:
    def test_monotone_and_vanishing(self, w_n3p3_R1, params_n3p3):
        E = hx.energy_profile(w_n3p3_R1.profile, params_n3p3)
        assert np.all(np.diff(E.values) <= 1e-10 * np.abs(E.values).max())
        assert abs(E.values[-1]) < 1e-6

    def test_boundary_value_is_kinetic(self, w_n3p3_R1, params_n3p3):
        E = hx.energy_profile(w_n3p3_R1.profile, params_n3p3)
        assert abs(E.values[0] - 0.5 * w_n3p3_R1.slope_star**2) < 1e-10
        assert E.values[0] > 0.0

    def test_violation_detected_on_corrupted_profile(self, params_n3p3):
        grid = RadialGrid.uniform(1.0, 10.0, 101)
        r = grid.nodes
        rising = RadialProfile(grid, 0.1 * r, np.full(r.size, 0.1), 1.0, 2,
                               meta={"N": 3, "p": 3.0, "lam": 1.0})
        with pytest.raises(LemmaViolationError):
            hx.energy_profile(rising, params_n3p3)


class TestShape:
    def test_peak_bound_reference(self, w_n3p3_R1, params_n3p3):
        r_peak, peak = hx.profile_shape_check(w_n3p3_R1.profile, params_n3p3)
        assert peak >= math.sqrt(2.0)
        assert w_n3p3_R1.profile.r0 < r_peak < w_n3p3_R1.profile.r_max

    def test_peak_bound_quintic(self, cfg_mid):
        params = hx.ModelParams(2, 5.0)
        res = hx.solve_exterior_ground_state(params, 1.0, cfg_mid)
        _, peak = hx.profile_shape_check(res.profile, params)
        assert peak >= 3.0 ** 0.25

    def test_multiple_peaks_detected(self):
        grid = RadialGrid.uniform(1.0, 10.0, 401)
        r = grid.nodes
        wiggly = np.sin(r) ** 2 * np.exp(-0.5 * r) + 1e-3
        d = np.gradient(wiggly, r)
        prof = RadialProfile(grid, wiggly, d, 0.5, 2, meta={"N": 3, "p": 3.0})
        with pytest.raises(LemmaViolationError):
            hx.profile_shape_check(prof, hx.ModelParams(3, 3.0))


class TestReport:
    def test_all_four_pass_on_reference(self, params_n3p3, w_n3p3_R1, cfg_mid):
        records = qualitative_report(params_n3p3, w_n3p3_R1, cfg_mid)
        assert [r["lemma"] for r in records] == [
            "uniqueness_criterion_sign", "decay_rate", "energy_monotone", "single_peak",
        ]
        assert all(r["verdict"] == "pass" for r in records)
        assert records[1]["witness"]["abs_error"] < 1e-2
