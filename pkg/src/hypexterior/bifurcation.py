"""Locating the operator's eigenvalue crossings and the bifurcation radii.

sigma_{i_1}(lambda) dives to -infinity at the spectral threshold of the
first mode block and recrosses zero shortly above it, so the pipeline first
locates that threshold (zero of the lowest Dirichlet mode eigenvalue), then
samples sigma on a log grid reinforced near the threshold, and refines the
rightmost negative-to-positive bracket.  The certified crossing, the odd
kernel multiplicity, and the positivity of the higher modes at the crossing
are exactly the checkable hypotheses of the local bifurcation step; the
tangent domain shapes R*(1 + eps zeta) are emitted for plotting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import CertificateFailureError, SolverError, ValidationError
from .harmonics import (
    GroupSpectrum,
    G1Report,
    SymmetryGroup,
    check_g1,
    group_matrices,
    group_restricted_spectrum,
    invariant_basis,
    sphere_quadrature,
)
from .model import ModelParams, NumericsConfig, RadialProfile
from .radial import GroundStateCache
from .spectral import dirichlet_mode_eigenpair, lambda0_bound_fixed_point
from .dtn import SigmaCurve, sigma_curve, sigma_eigenvalue

__all__ = [
    "BifurcationPoint",
    "BoundaryShape",
    "CertificateReport",
    "PipelineResult",
    "find_lambda_star",
    "bifurcation_radius",
    "emit_perturbed_domain",
    "certify_local_bifurcation",
    "locate_mode_threshold",
    "run_bifurcation_pipeline",
]


@dataclass(frozen=True)
class BifurcationPoint:
    """A certified zero of sigma with negative sign on the left."""

    degree: int
    lambda_star: float
    radius_star: float
    sign_left: float
    sign_right: float
    kernel_multiplicity: int
    delta: float

    def __post_init__(self) -> None:
        if not (self.sign_left < 0.0 < self.sign_right):
            raise ValidationError("bifurcation point needs sigma < 0 left and > 0 right")
        if abs(self.radius_star**2 * self.lambda_star - 1.0) > 1e-12:
            raise ValidationError("radius_star must equal lambda_star^(-1/2)")

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "lambda_star": self.lambda_star,
            "radius_star": self.radius_star,
            "sign_left": self.sign_left,
            "sign_right": self.sign_right,
            "kernel_multiplicity": self.kernel_multiplicity,
            "delta": self.delta,
        }


@dataclass
class BoundaryShape:
    """Sampled perturbed boundary r(theta) = R*(1 + eps * zeta(theta))."""

    base_radius: float
    epsilon: float
    degree: int
    mode_coefficients: np.ndarray
    points: np.ndarray          # (M, ambient_N) unit vectors
    radii: np.ndarray           # (M,)
    group_label: str
    sign_symmetric: bool | None = None

    def to_json(self) -> dict:
        return {
            "base_radius": self.base_radius,
            "epsilon": self.epsilon,
            "degree": self.degree,
            "mode_coefficients": self.mode_coefficients.tolist(),
            "group": self.group_label,
            "sign_symmetric": self.sign_symmetric,
            "n_samples": int(self.radii.size),
        }


def bifurcation_radius(point_or_lambda: BifurcationPoint | float) -> float:
    """R* = 1/sqrt(lambda*)."""
    lam = point_or_lambda.lambda_star if isinstance(point_or_lambda, BifurcationPoint) \
        else float(point_or_lambda)
    if not lam > 0.0:
        raise ValidationError("lambda_star must be positive")
    return lam ** -0.5


def find_lambda_star(
    degree: int,
    curve: SigmaCurve,
    sigma_fn,
    cfg: NumericsConfig | None = None,
    kernel_multiplicity: int = 1,
    sigma_tol: float = 1e-8,
) -> BifurcationPoint:
    """Refine the rightmost negative-to-positive bracket of a sampled curve.

    Parameters
    ----------
    degree : int
    curve : SigmaCurve
        Must contain at least one upcrossing bracket.
    sigma_fn : callable
        Fresh sigma evaluations (lambda -> sigma) used by the refinement and
        the +-delta sign certificates.
    cfg : NumericsConfig, optional
    kernel_multiplicity : int
        m_k of the degree block (recorded on the point).
    sigma_tol : float
        The refined |sigma(lambda*)| must fall below this.
    """
    cfg = cfg or NumericsConfig()
    brackets = curve.upcrossing_brackets()
    if not brackets:
        raise SolverError(
            f"no sign-change bracket with sigma negative on the left; "
            f"samples: {list(curve.samples)}"
        )
    lo, hi = brackets[-1]
    lam_star = brentq(sigma_fn, lo, hi, xtol=1e-13 * max(1.0, hi), rtol=8.9e-16)
    s_at = sigma_fn(lam_star)
    if abs(s_at) > sigma_tol:
        raise SolverError(f"|sigma(lambda*)| = {abs(s_at)} above {sigma_tol}")
    delta = 1e-3 * lam_star
    s_left, s_right = sigma_fn(lam_star - delta), sigma_fn(lam_star + delta)
    if not (s_left < 0.0 < s_right):
        raise SolverError(
            f"sign certificate failed at +-delta: sigma({lam_star - delta})={s_left}, "
            f"sigma({lam_star + delta})={s_right}"
        )
    return BifurcationPoint(
        degree=degree,
        lambda_star=float(lam_star),
        radius_star=bifurcation_radius(float(lam_star)),
        sign_left=float(s_left),
        sign_right=float(s_right),
        kernel_multiplicity=kernel_multiplicity,
        delta=delta,
    )


def _quasi_uniform_points(N: int, n: int, seed: int = 7) -> np.ndarray:
    if N == 2:
        th = 2.0 * math.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if N == 3:
        from .harmonics import _fibonacci_sphere

        return _fibonacci_sphere(n)
    # N = 4: low-discrepancy via a seeded Gaussian shell
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, N))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def emit_perturbed_domain(
    point: BifurcationPoint,
    epsilon: float,
    group: SymmetryGroup,
    n_samples: int = 2000,
    mode_index: int = 0,
) -> BoundaryShape:
    """Sample the tangent perturbed boundary R*(1 + eps * zeta).

    zeta is a unit-L2 invariant harmonic of the bifurcation degree (the
    lexicographically first basis vector unless mode_index says otherwise).
    Asserts invariance under the group action and, for N in {2, 3}, the
    mean-zero property on an exact quadrature grid (both to 1e-10).
    """
    if abs(epsilon) >= 0.5:
        raise ValidationError("|epsilon| must stay below 0.5")
    basis = invariant_basis(group, point.degree)
    if not 0 <= mode_index < basis.dim:
        raise ValidationError(f"mode_index out of range for multiplicity {basis.dim}")
    coeffs = np.zeros(basis.dim)
    coeffs[mode_index] = 1.0
    N = group.ambient_N
    pts = _quasi_uniform_points(N, n_samples)
    zeta = basis.evaluate(pts)[:, mode_index]
    radii = point.radius_star * (1.0 + epsilon * zeta)
    if np.any(radii <= 0.0):
        raise ValidationError("epsilon too large: nonpositive boundary radius")

    # group invariance of the emitted samples
    mats = group_matrices(group)
    if mats.shape[0] > 240:  # subsample the 7200-element 600-cell group
        rng = np.random.default_rng(11)
        mats = mats[rng.choice(mats.shape[0], size=120, replace=False)]
    sub = pts[:: max(1, n_samples // 400)]
    z_ref = basis.evaluate(sub)[:, mode_index]
    for g in mats:
        z_g = basis.evaluate(sub @ g.T)[:, mode_index]
        if np.abs(z_g - z_ref).max() > 1e-10:
            raise ValidationError("emitted shape is not invariant under the group")

    # mean-zero of the perturbation
    if N in (2, 3):
        qpts, qwts = sphere_quadrature(N, point.degree)
        mean = float(qwts @ basis.evaluate(qpts)[:, mode_index]) / qwts.sum()
        if abs(mean) * abs(epsilon) > 1e-10:
            raise ValidationError(f"perturbation mean {mean} is not zero")
    else:
        mean = float(zeta.mean())  # Monte-Carlo sanity only; exactness is structural
        if abs(mean) > 1e-2:
            raise ValidationError("perturbation mean sanity check failed")

    # is -zeta in the group orbit of zeta? (recorded, not asserted)
    sign_symmetric = None
    try:
        full_mats = group_matrices(group)
        probe = sub[:50]
        z_probe = basis.evaluate(probe)[:, mode_index]
        sign_symmetric = any(
            np.abs(basis.evaluate(probe @ g.T)[:, mode_index] + z_probe).max() < 1e-8
            for g in full_mats[: min(len(full_mats), 240)]
        )
    except Exception:
        pass

    return BoundaryShape(
        base_radius=point.radius_star,
        epsilon=epsilon,
        degree=point.degree,
        mode_coefficients=coeffs,
        points=pts,
        radii=radii,
        group_label=group.label,
        sign_symmetric=sign_symmetric,
    )


@dataclass
class CertificateReport:
    """The numerically checkable hypotheses of the local bifurcation step."""

    crossing_ok: bool
    crossing_detail: dict
    multiplicity_ok: bool
    multiplicity_detail: dict
    higher_modes_ok: bool
    higher_modes_detail: dict
    g1: G1Report | None
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        self.passed = self.crossing_ok and self.multiplicity_ok and self.higher_modes_ok

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "crossing": {"ok": self.crossing_ok, **self.crossing_detail},
            "multiplicity": {"ok": self.multiplicity_ok, **self.multiplicity_detail},
            "higher_modes": {"ok": self.higher_modes_ok, **self.higher_modes_detail},
            "g1": self.g1.to_json() if self.g1 is not None else None,
        }


def certify_local_bifurcation(
    point: BifurcationPoint,
    spectrum: GroupSpectrum,
    sigma_fn_factory,
    n_higher: int = 2,
) -> CertificateReport:
    """Check (a) the sign crossing (stable under halving delta), (b) odd kernel
    multiplicity with (G1), and (c) positivity of the next mode eigenvalues at
    lambda*.  Failures are reported, not raised."""
    g1 = check_g1(spectrum)
    lam, d = point.lambda_star, point.delta
    sigma_main = sigma_fn_factory(point.degree)
    s_l2, s_r2 = sigma_main(lam - d / 2), sigma_main(lam + d / 2)
    crossing_ok = (point.sign_left < 0 < point.sign_right) and (s_l2 < 0 < s_r2)
    crossing_detail = {
        "sign_left": point.sign_left, "sign_right": point.sign_right,
        "sign_left_half_delta": s_l2, "sign_right_half_delta": s_r2,
        "delta": d,
    }
    entry = spectrum.entry_for(point.degree)
    multiplicity_ok = entry.multiplicity % 2 == 1 and g1.satisfied
    multiplicity_detail = {"m": entry.multiplicity, "g1_satisfied": g1.satisfied}
    higher = [e.degree for e in spectrum.entries if e.degree > point.degree][:n_higher]
    sigmas_higher = {}
    ok_higher = True
    for deg in higher:
        val = sigma_fn_factory(deg)(lam)
        sigmas_higher[deg] = val
        ok_higher = ok_higher and val > 0.0
    return CertificateReport(
        crossing_ok=crossing_ok,
        crossing_detail=crossing_detail,
        multiplicity_ok=multiplicity_ok,
        multiplicity_detail=multiplicity_detail,
        higher_modes_ok=ok_higher,
        higher_modes_detail={"sigmas_at_lambda_star": sigmas_higher},
        g1=g1,
    )


def locate_mode_threshold(
    params: ModelParams, degree: int, provider, lo: float, hi: float,
    cfg: NumericsConfig | None = None, tol: float = 1e-4,
) -> float:
    """Zero of the lowest Dirichlet mode eigenvalue nu_1(lambda) in [lo, hi].

    nu_1 increases through zero there; below the zero the quadratic form has a
    trace-zero negative direction and sigma is about to dive.
    """
    cfg = cfg or NumericsConfig()

    def nu1(lam: float) -> float:
        vals, _ = dirichlet_mode_eigenpair(provider(lam), params, degree, cfg)
        return float(vals[0])

    f_lo, f_hi = nu1(lo), nu1(hi)
    if not (f_lo < 0.0 < f_hi):
        raise SolverError(
            f"mode threshold not bracketed on [{lo}, {hi}]: nu1 = ({f_lo}, {f_hi})"
        )
    return float(brentq(nu1, lo, hi, xtol=tol, rtol=1e-10))


@dataclass
class PipelineResult:
    params: ModelParams
    group: SymmetryGroup
    spectrum: GroupSpectrum
    g1: G1Report
    bound: float | None = None
    bound_history: list[float] | None = None
    threshold: float | None = None
    curve: SigmaCurve | None = None
    point: BifurcationPoint | None = None
    certificate: CertificateReport | None = None
    shapes: list[BoundaryShape] | None = None
    failure_stage: str | None = None

    @property
    def certified(self) -> bool:
        return self.certificate is not None and self.certificate.passed


def run_bifurcation_pipeline(
    params: ModelParams,
    group: SymmetryGroup,
    cfg: NumericsConfig | None = None,
    lam_hi: float = 50.0,
    n_grid: int = 40,
    epsilons: tuple[float, ...] = (0.1,),
    k_max: int = 25,
    cache: GroundStateCache | None = None,
    n_shape_samples: int = 2000,
) -> PipelineResult:
    """End-to-end run: group spectrum, (G1), threshold bound, sigma curve,
    lambda*, certificates, and tangent shapes.

    A group failing (G1) short-circuits with a certificate failure at the
    multiplicity stage (no solves are attempted).
    """
    cfg = cfg or NumericsConfig()
    spectrum = group_restricted_spectrum(group, k_max)
    if not spectrum.entries:
        raise ValidationError(f"{group.label} has no invariant degrees up to {k_max}")
    g1 = check_g1(spectrum)
    result = PipelineResult(params, group, spectrum, g1)
    if not g1.satisfied:
        result.certificate = CertificateReport(
            crossing_ok=False,
            crossing_detail={"skipped": "hypothesis (G1) failed"},
            multiplicity_ok=False,
            multiplicity_detail={"m": g1.m1, "g1_satisfied": False},
            higher_modes_ok=False,
            higher_modes_detail={},
            g1=g1,
        )
        result.failure_stage = "g1"
        return result

    provider = cache or GroundStateCache(params, cfg)
    i1 = spectrum.entries[0].degree
    mu1 = spectrum.entries[0].eigenvalue

    bound, history = lambda0_bound_fixed_point(params, mu1, provider, cfg)
    result.bound, result.bound_history = bound, history

    # locate the mode threshold to guide the sampling grid
    lo = 1.05 * bound
    try:
        threshold = locate_mode_threshold(params, i1, provider, lo, lam_hi, cfg)
        result.threshold = threshold
    except SolverError:
        threshold = None

    grid = np.geomspace(lo, lam_hi, n_grid)
    if threshold is not None:
        dense = threshold * (1.0 + np.geomspace(2e-3, 2.0, 25))
        grid = np.unique(np.concatenate([grid, dense[dense < lam_hi]]))
    curve = sigma_curve(i1, grid, provider, cfg, params, lambda_floor=bound)
    result.curve = curve

    def sigma_fn_factory(degree: int):
        return lambda lam: sigma_eigenvalue(degree, lam, provider(lam), cfg, params)

    try:
        point = find_lambda_star(
            i1, curve, sigma_fn_factory(i1), cfg,
            kernel_multiplicity=spectrum.entries[0].multiplicity,
        )
    except SolverError as exc:
        result.failure_stage = f"no_bracket: {exc}"
        return result
    result.point = point
    result.certificate = certify_local_bifurcation(point, spectrum, sigma_fn_factory)
    result.shapes = [
        emit_perturbed_domain(point, eps, group, n_samples=n_shape_samples)
        for eps in epsilons
    ]
    return result
