"""Executable versions of the qualitative ground-state lemmas.

Each check turns one proved property of the exterior ground state into a
numerical assertion: the sign pattern of the uniqueness criterion G', the
far-field decay rate, the monotone energy, and the single-peak shape.  A
failure raises LemmaViolationError -- these are theorems, so a violation
signals a solver bug, not physics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import LemmaViolationError, ValidationError
from .model import ModelParams, NumericsConfig, RadialProfile, decay_exponent_nonlinear
from .radial import ShootingResult

__all__ = [
    "SignPattern",
    "analyze_G_sign",
    "estimate_decay_rate",
    "energy_profile",
    "profile_shape_check",
    "decay_rate_upper_bound",
    "qualitative_report",
]

ALWAYS_NEGATIVE = "ALWAYS_NEGATIVE"
ONE_SIGN_CHANGE = "ONE_SIGN_CHANGE"

# a sample only counts as signed if it clears this fraction of the max
# magnitude (suppresses floating-point noise near the zero crossing)
_SIGN_REL_TOL = 1e-12


@dataclass(frozen=True)
class SignPattern:
    kind: str
    change_point: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (ALWAYS_NEGATIVE, ONE_SIGN_CHANGE):
            raise ValidationError(f"unknown sign pattern {self.kind}")
        if (self.kind == ONE_SIGN_CHANGE) != (self.change_point is not None):
            raise ValidationError("change_point must be present iff ONE_SIGN_CHANGE")


def _alpha_beta(params: ModelParams) -> tuple[float, float]:
    alpha = 2.0 * (params.N - 1.0) / (params.p + 3.0)
    return alpha, alpha * (params.p - 1.0)


def _F_factor(params: ModelParams, r: np.ndarray) -> np.ndarray:
    """G'(r) = sinh^(beta-1) cosh * F(r); the sign of G' is the sign of F."""
    a, b = _alpha_beta(params)
    N = params.N
    coth2 = 1.0 / np.tanh(r) ** 2
    return 2 * a * (a + 1 - N) - b - a * (b - 2) + a * (b - 2) * (a + 2 - N) * coth2


def _F_limit(params: ModelParams) -> float:
    a, b = _alpha_beta(params)
    N = params.N
    return 2 * a * (a + 1 - N) - b - a * (b - 2) + a * (b - 2) * (a + 2 - N)


def analyze_G_sign(params: ModelParams, R: float, r_samples: int = 400) -> SignPattern:
    """Detect the sign pattern of G' on (R, infinity).

    The derivative factors as G' = sinh^(beta-1)(r) cosh(r) F(r) with a
    strictly positive prefactor, so the pattern of F is sampled on a
    log-spaced grid.  Exactly two outcomes are lawful: always negative, or
    positive at R with a single sign change.  Anything else raises.
    """
    if not R > 0.0:
        raise ValidationError("R must be positive")
    if r_samples < 16:
        raise ValidationError("r_samples too small to resolve a sign pattern")
    r = R + np.geomspace(1e-4, 40.0, r_samples)
    F = _F_factor(params, r)
    scale = np.abs(F).max()
    signed = np.where(np.abs(F) > _SIGN_REL_TOL * scale, np.sign(F), 0.0)

    if params.N >= 3:
        # F must be strictly decreasing; beyond the resolvable variation of
        # coth^2 (which saturates exponentially) consecutive samples may tie
        # in floating point, so the check allows exact ties at noise level
        if not np.all(np.diff(F) <= _SIGN_REL_TOL * scale):
            raise LemmaViolationError("F is not strictly decreasing for N >= 3")
        resolved = np.abs(np.diff(F)) > _SIGN_REL_TOL * scale
        if resolved.any() and not np.all(np.diff(F)[resolved] < 0.0):
            raise LemmaViolationError("F is not strictly decreasing for N >= 3")
    if _F_limit(params) >= 0.0:
        raise LemmaViolationError("far-field limit of F is not negative")
    if signed[-1] > 0:
        raise LemmaViolationError("liminf of G' is not negative on the sampled range")

    nonzero = signed[signed != 0.0]
    flips = int(np.sum(nonzero[1:] != nonzero[:-1]))
    if nonzero.size == 0 or nonzero[0] < 0:
        if flips != 0:
            raise LemmaViolationError("G' recovers positivity after starting negative")
        return SignPattern(ALWAYS_NEGATIVE)
    if flips != 1 or nonzero[-1] > 0:
        raise LemmaViolationError(f"G' shows {flips} sign changes; the lemma allows one")
    lo = r[np.where(signed > 0)[0].max()]
    hi = r[np.where(signed < 0)[0].min()]
    change = brentq(lambda rr: _F_factor(params, np.asarray([rr]))[0], lo, hi, xtol=1e-12)
    return SignPattern(ONE_SIGN_CHANGE, float(change))


def decay_rate_upper_bound(params: ModelParams) -> float:
    """The a-priori bound N* = N + sqrt(2 + (N-1)^2) on -w'/w."""
    return params.N + math.sqrt(2.0 + (params.N - 1.0) ** 2)


def estimate_decay_rate(profile: RadialProfile, window: tuple[float, float]) -> float:
    """Mean of -w'/w over a window inside the decaying region.

    Rejects windows that touch a zero of the profile (the ratio is undefined
    there).  The sampled ratio is also checked against the a-priori bound N*.
    """
    ra, rb = window
    if not profile.r0 < ra < rb <= profile.r_max:
        raise ValidationError(f"window {window} not inside ({profile.r0}, {profile.r_max}]")
    nodes = profile.grid.nodes
    mask = (nodes >= ra) & (nodes <= rb)
    w = profile.values[mask]
    if w.size < 8:
        raise ValidationError("window contains too few nodes")
    if np.any(w <= 0.0):
        raise ValidationError("window contains a zero of the profile")
    ratio = -profile.derivatives[mask] / w
    params = ModelParams(profile.meta["N"], profile.meta["p"])
    bound = decay_rate_upper_bound(params)
    if np.any(ratio >= bound):
        raise LemmaViolationError(f"-w'/w exceeded the bound N* = {bound}")
    return float(ratio.mean())


def energy_profile(profile: RadialProfile, params: ModelParams) -> RadialProfile:
    """Mechanical energy E = lam w'^2/2 + w^(p+1)/(p+1) - w^2/2 on the grid.

    Asserts E nonincreasing and E(r_max) >= -quad_tol-scale 0 (the energy is
    dissipated by the drift term, so any increase is a solver defect).
    """
    lam = profile.meta.get("lam", 1.0)
    p = params.p
    w, wp = profile.values, profile.derivatives
    E = 0.5 * lam * wp**2 + np.abs(w) ** (p + 1.0) / (p + 1.0) - 0.5 * w**2
    scale = np.abs(E).max()
    if np.any(np.diff(E) > 1e-10 * scale):
        raise LemmaViolationError("energy is not nonincreasing along the profile")
    if E[-1] < -1e-8 * max(scale, 1.0):
        raise LemmaViolationError(f"energy at r_max is {E[-1]}, visibly negative")
    grid = profile.grid
    # E inherits the tail scale of w^2 (kinetic and potential parts both ~ e^{-2 gamma r})
    dE = np.gradient(E, grid.nodes, edge_order=2)
    return RadialProfile(
        grid, E, dE, 2.0 * profile.decay_exponent, profile.weight_power,
        meta={**profile.meta, "kind": "energy"},
    )


def profile_shape_check(profile: RadialProfile, params: ModelParams) -> tuple[float, float]:
    """Assert the increase-to-a-single-peak-then-decay shape; return the peak.

    The stored derivative must change sign exactly once (+ to -).  The peak
    location is refined by one parabolic step and must clear the energy bound
    ((p+1)/2)^(1/(p-1)).
    """
    wp = profile.derivatives
    scale = np.abs(wp).max()
    signed = np.where(np.abs(wp) > 1e-10 * scale, np.sign(wp), 0.0)
    nonzero = signed[signed != 0.0]
    flips = np.sum(nonzero[1:] != nonzero[:-1])
    if not (nonzero.size and nonzero[0] > 0 and nonzero[-1] < 0 and flips == 1):
        raise LemmaViolationError(
            f"derivative shows {flips} sign changes; the ground state has exactly one peak"
        )
    j = int(np.argmax(profile.values))
    x = profile.grid.nodes
    if 0 < j < x.size - 1:
        y0, y1, y2 = profile.values[j - 1: j + 2]
        h = x[j + 1] - x[j]
        denom = y0 - 2.0 * y1 + y2
        shift = 0.5 * h * (y0 - y2) / denom if denom != 0.0 else 0.0
        r_peak = x[j] + np.clip(shift, -h, h)
    else:
        r_peak = x[j]
    peak = float(profile.evaluate(float(r_peak)))
    if peak < params.peak_lower_bound * (1.0 - 1e-9):
        raise LemmaViolationError(
            f"peak {peak} below the energy lower bound {params.peak_lower_bound}"
        )
    return float(r_peak), peak


def qualitative_report(
    params: ModelParams, result: ShootingResult, cfg: NumericsConfig | None = None,
) -> list[dict]:
    """Run all four lemma checks on an accepted ground state and collect
    verdict records (lemma, inputs, verdict, witness)."""
    cfg = cfg or NumericsConfig()
    prof = result.profile
    R = prof.r0
    records: list[dict] = []

    def record(lemma: str, witness, verdict: str = "pass") -> None:
        records.append({
            "lemma": lemma,
            "inputs": {"N": params.N, "p": params.p, "R": R},
            "verdict": verdict,
            "witness": witness,
        })

    pattern = analyze_G_sign(params, R)
    record("uniqueness_criterion_sign", {
        "kind": pattern.kind, "change_point": pattern.change_point,
    })
    window = (prof.r_max - 10.0, prof.r_max - 2.0)
    rate = estimate_decay_rate(prof, window)
    gamma = decay_exponent_nonlinear(params, prof.meta.get("lam", 1.0))
    record("decay_rate", {
        "window": window, "measured": rate, "expected": gamma,
        "abs_error": abs(rate - gamma), "upper_bound": decay_rate_upper_bound(params),
    })
    E = energy_profile(prof, params)
    record("energy_monotone", {
        "E_at_boundary": float(E.values[0]), "E_at_r_max": float(E.values[-1]),
    })
    r_peak, peak = profile_shape_check(prof, params)
    record("single_peak", {
        "r_peak": r_peak, "peak": peak, "lower_bound": params.peak_lower_bound,
    })
    return records
