"""Radial spectrum of the linearized operator and the two quadratic forms.

The linearization at a radial state u with parameter lam is

    L z = -lam (z'' + (N-1) coth(r) z') + (1 - p u^(p-1)) z

on the state's own radial domain with a Dirichlet wall at r0.  The
discretization is the textbook one: Liouville symmetrization by the square
root of the volume weight turns L into a symmetric tridiagonal matrix whose
negative-eigenvalue count doubles as the Morse index; a Robin ghost from the
linearized decay exponent closes the truncated end.  Eigenvalues are
Richardson-extrapolated over a grid doubling (the doubling also serves as the
self-convergence oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import eigh_tridiagonal

from .errors import (
    LemmaViolationError,
    MorseIndexViolationError,
    ValidationError,
)
from .model import (
    ModelParams,
    NumericsConfig,
    RadialGrid,
    RadialProfile,
    decay_exponent_linearized,
    metric_factors,
)
from .harmonics import sphere_eigenvalue

__all__ = [
    "EigenPair",
    "ModeFunction",
    "radial_spectrum",
    "sturm_negative_count",
    "quadratic_form_Q",
    "quadratic_form_Qtilde",
    "lambda0_lower_bound",
    "lambda0_bound_fixed_point",
    "dirichlet_mode_eigenpair",
    "weighted_boundary_inequality_check",
    "trace_inequality_check",
    "proof_constant",
]


@dataclass
class EigenPair:
    """One radial eigenpair; eigenvalue is Richardson-extrapolated, the raw
    coarse/fine values are kept for the stability oracle."""

    eigenvalue: float
    eigenfunction: RadialProfile
    eigenvalue_coarse: float
    eigenvalue_fine: float


@dataclass
class ModeFunction:
    """Separated trial function: radial part times a unit vector in the
    m_k-dimensional invariant eigenspace of degree i_k."""

    radial: RadialProfile
    degree: int
    coefficients: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ValidationError("mode degree must be >= 0")
        if self.coefficients is None:
            self.coefficients = np.array([1.0])
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        nrm = np.linalg.norm(self.coefficients)
        if abs(nrm - 1.0) > 1e-10:
            raise ValidationError("eigenspace coefficients must have unit norm")


def _sym_potential(params: ModelParams, lam: float, r: np.ndarray,
                   u_vals: np.ndarray, mu: float = 0.0) -> np.ndarray:
    """Potential of the Liouville-symmetrized operator:
    lam[(N-1)^2/4 + (N-1)(N-3)/(4 sinh^2)] + 1 - p u^(p-1) + lam mu/sinh^2."""
    n1 = params.N - 1.0
    s2 = np.sinh(r) ** 2
    return (
        lam * (n1 * n1 / 4.0 + n1 * (params.N - 3.0) / (4.0 * s2) + mu / s2)
        + 1.0
        - params.p * np.abs(u_vals) ** (params.p - 1.0)
    )


def _sym_tridiag(params: ModelParams, lam: float, u: RadialProfile, n: int,
                 mu: float = 0.0, robin: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Assemble (d, e, nodes) of the symmetrized matrix on [r0, r_max] with a
    Dirichlet wall at r0 and (optionally) a Robin ghost at r_max."""
    r0, r_max = u.r0, u.r_max
    x = np.linspace(r0, r_max, n)
    h = x[1] - x[0]
    V = _sym_potential(params, lam, x, u.evaluate(x), mu)
    if robin:
        xs = x[1:]
        d = 2.0 * lam / h**2 + V[1:]
        e = np.full(xs.size - 1, -lam / h**2)
        gamma = decay_exponent_linearized(params, lam, 0.0)
        kappa = gamma - 0.5 * (params.N - 1.0) / math.tanh(r_max)
        d[-1] += 2.0 * lam * kappa / h
        e[-1] = -math.sqrt(2.0) * lam / h**2  # similarity-symmetrized ghost row
    else:
        d = 2.0 * lam / h**2 + V[1:-1]
        e = np.full(n - 3, -lam / h**2)
    return d, e, x


def sturm_negative_count(d: np.ndarray, e: np.ndarray, shift: float = 0.0) -> int:
    """Number of eigenvalues of the symmetric tridiagonal (d, e) below shift,
    by counting negative pivots of the LDL^T factorization (Sturm sequence)."""
    q = d[0] - shift
    count = int(q < 0.0)
    tiny = 1e-300
    for i in range(1, d.size):
        if q == 0.0:
            q = tiny
        q = d[i] - shift - e[i - 1] ** 2 / q
        count += q < 0.0
    return count


def _fd_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order interior finite differences (second-order at the ends)."""
    n = values.size
    out = np.empty(n)
    out[2:-2] = (values[:-4] - 8 * values[1:-3] + 8 * values[3:-1] - values[4:]) / (12 * h)
    out[0] = (-3 * values[0] + 4 * values[1] - values[2]) / (2 * h)
    out[1] = (values[2] - values[0]) / (2 * h)
    out[-2] = (values[-1] - values[-3]) / (2 * h)
    out[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * h)
    return out


def _solve_grid(params: ModelParams, lam: float, u: RadialProfile, n: int,
                n_eigs: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, tuple]:
    d, e, x = _sym_tridiag(params, lam, u, n)
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, n_eigs - 1))
    vecs[-1, :] *= math.sqrt(2.0)  # undo the ghost-row similarity scaling
    counts = (
        sturm_negative_count(d, e, 0.0),
        sturm_negative_count(d, e, -1e-8),
        sturm_negative_count(d, e, +1e-8),
    )
    return vals, vecs, x, counts


def radial_spectrum(
    u: RadialProfile, params: ModelParams, n_eigs: int = 3,
    cfg: NumericsConfig | None = None, enforce_morse: bool = True,
) -> list[EigenPair]:
    """Lowest radial eigenpairs of the linearization at u on u's own domain.

    Parameters
    ----------
    u : RadialProfile
        An accepted ground state; its `lam` metadata selects the operator.
    params : ModelParams
    n_eigs : int
        How many eigenpairs to return (>= 2 so nondegeneracy is visible).
    cfg : NumericsConfig, optional
    enforce_morse : bool
        When True (default), raise MorseIndexViolationError unless exactly one
        eigenvalue is negative and none sits within 1e-8 of zero.

    Returns
    -------
    list[EigenPair]
        Richardson-extrapolated eigenvalues over the (n, 2n) grid pair; the
        ground eigenfunction is normalized to unit weighted L2 norm and made
        positive.
    """
    cfg = cfg or NumericsConfig()
    lam = u.meta.get("lam", 1.0)
    n = cfg.grid_points
    vals_c, vecs_c, x_c, counts_c = _solve_grid(params, lam, u, n, n_eigs)
    n_f = 2 * n - 1
    vals_f, vecs_f, x_f, counts_f = _solve_grid(params, lam, u, n_f, n_eigs)

    if enforce_morse:
        if counts_c[0] != 1 or counts_f[0] != 1:
            raise MorseIndexViolationError(
                f"negative eigenvalue count is {counts_c[0]} (coarse) / {counts_f[0]} (fine), expected 1"
            )
        if counts_c[1] != counts_c[2] or counts_f[1] != counts_f[2]:
            raise MorseIndexViolationError("an eigenvalue sits within 1e-8 of zero")

    weight = params.N - 1
    pairs: list[EigenPair] = []
    for k in range(n_eigs):
        tau_c, tau_f = float(vals_c[k]), float(vals_f[k])
        tau = (4.0 * tau_f - tau_c) / 3.0
        # symmetrized eigenvectors back to z = S^{-(N-1)/2} y, on each grid
        z_c = np.concatenate([[0.0], vecs_c[:, k] / np.sinh(x_c[1:]) ** (weight / 2.0)])
        z_f = np.concatenate([[0.0], vecs_f[:, k] / np.sinh(x_f[1:]) ** (weight / 2.0)])
        gamma_k = decay_exponent_linearized(params, lam, min(tau, 0.99))

        def normalized(z: np.ndarray, x: np.ndarray) -> np.ndarray:
            body = simpson(np.sinh(x) ** weight * z * z, x=x)
            # analytic tail of the square
            amp = z[-1] ** 2
            rate = 2.0 * gamma_k
            tail = _tail_any_weight(weight, x[-1], rate, amp)
            z = z / math.sqrt(body + tail)
            j = int(np.argmax(np.abs(z)))
            return z if z[j] > 0 else -z

        z_c = normalized(z_c, x_c)
        z_f = normalized(z_f, x_f)
        z_star = (4.0 * z_f[::2] - z_c) / 3.0
        h = x_c[1] - x_c[0]
        prof = RadialProfile(
            RadialGrid(x_c), z_star, _fd_derivative(z_star, h), gamma_k, weight,
            meta={
                "kind": "radial_eigenfunction", "N": params.N, "p": params.p,
                "lam": lam, "tau": tau, "index": k,
            },
        )
        pairs.append(EigenPair(tau, prof, tau_c, tau_f))

    ground = pairs[0].eigenfunction
    if ground.values.min() < -1e-8 * ground.values.max():
        raise LemmaViolationError("ground radial eigenfunction is not positive")
    return pairs


def dirichlet_mode_eigenpair(
    u: RadialProfile, params: ModelParams, degree: int,
    cfg: NumericsConfig | None = None, n_eigs: int = 1,
) -> tuple[np.ndarray, RadialProfile]:
    """Lowest eigenvalue(s) nu of the degree-mu mode operator with Dirichlet
    trace (psi(r0) = 0), plus the normalized ground eigenfunction.

    The zero crossing of nu_1(lambda) is the spectral threshold where the
    mode boundary solve degenerates; the eigenfunction at nu_1 < 0 is the
    negative-direction witness for the quadratic form near that threshold.
    """
    cfg = cfg or NumericsConfig()
    lam = u.meta.get("lam", 1.0)
    mu = sphere_eigenvalue(degree, params.N)
    d, e, x = _sym_tridiag(params, lam, u, cfg.grid_points, mu=mu)
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, n_eigs - 1))
    vecs[-1, :] *= math.sqrt(2.0)
    weight = params.N - 1
    z = np.concatenate([[0.0], vecs[:, 0] / np.sinh(x[1:]) ** (weight / 2.0)])
    gamma = decay_exponent_linearized(params, lam, min(float(vals[0]), 0.99))
    body = simpson(np.sinh(x) ** weight * z * z, x=x)
    z /= math.sqrt(body + _tail_any_weight(weight, x[-1], 2 * gamma, z[-1] ** 2))
    if z[np.argmax(np.abs(z))] < 0:
        z = -z
    prof = RadialProfile(
        RadialGrid(x), z, _fd_derivative(z, x[1] - x[0]), gamma, weight,
        meta={"kind": "mode_eigenfunction", "N": params.N, "p": params.p,
              "lam": lam, "degree": degree, "nu": float(vals[0])},
    )
    return np.asarray(vals, dtype=float), prof


# ----------------------------------------------------------------------------
# quadratic forms
# ----------------------------------------------------------------------------

def _tail_any_weight(weight: int, r_start: float, rate: float, amp: float) -> float:
    """Tail integral of sinh^weight * amp*e^{-rate (r - r_start)} (any weight)."""
    if amp == 0.0:
        return 0.0
    from .model import _binomial_tail_integral

    return _binomial_tail_integral(weight, r_start, rate, amp)


def _form_integrals(psi: ModeFunction, u: RadialProfile, params: ModelParams) -> float:
    """The separated quadratic form

        int S^(N-1) (lam psi'^2 + (1 - p u^(p-1)) psi^2) dr
        + lam mu int S^(N-3) psi^2 dr            (+ analytic tails).
    """
    lam = u.meta.get("lam", 1.0)
    prof = psi.radial
    x = prof.grid.nodes
    w = params.N - 1
    uv = u.evaluate(x)
    pot = 1.0 - params.p * np.abs(uv) ** (params.p - 1.0)
    sN1 = np.sinh(x) ** w
    body = simpson(sN1 * (lam * prof.derivatives**2 + pot * prof.values**2), x=x)
    mu = sphere_eigenvalue(psi.degree, params.N)
    if mu != 0.0:
        body += lam * mu * simpson(np.sinh(x) ** (w - 2) * prof.values**2, x=x)
    # tails: psi ~ psi_M e^{-g(r-r_max)}, u^(p-1) negligible there
    g = prof.decay_exponent
    ampv = prof.values[-1] ** 2
    tail = _tail_any_weight(w, prof.r_max, 2 * g, lam * g * g * ampv + ampv)
    if mu != 0.0:
        tail += lam * mu * _tail_any_weight(w - 2, prof.r_max, 2 * g, ampv)
    return float(body + tail)


def quadratic_form_Q(psi: ModeFunction, u: RadialProfile, params: ModelParams) -> float:
    """The linearized quadratic form on trace-zero separated functions.

    Requires psi to vanish at the inner boundary; equals the Rayleigh value
    tau ||psi||^2 on eigenfunctions.
    """
    prof = psi.radial
    scale = np.abs(prof.values).max()
    if abs(prof.values[0]) > 1e-10 * max(scale, 1e-300):
        raise ValidationError("quadratic_form_Q needs a trace-zero radial part")
    return _form_integrals(psi, u, params)


def quadratic_form_Qtilde(psi: ModeFunction, u: RadialProfile, params: ModelParams) -> float:
    """The boundary-relaxed form: Q minus lam (N-1) coth(1) S^(N-1)(1) psi(1)^2.

    Restricted to trace-zero inputs it equals quadratic_form_Q exactly (the
    subtraction is a floating-point zero).  The inner radius must be 1 (the
    boundary constant is pinned there).
    """
    prof = psi.radial
    if abs(prof.r0 - 1.0) > 1e-12:
        raise ValidationError("the boundary-relaxed form is defined on [1, infinity)")
    lam = u.meta.get("lam", 1.0)
    s1, _, coth1 = metric_factors(1.0)
    boundary = lam * (params.N - 1.0) * coth1 * s1 ** (params.N - 1) * prof.values[0] ** 2
    return _form_integrals(psi, u, params) - boundary


def proof_constant() -> float:
    """3(e^2+1)/(4(e^2-1)), the constant that must stay below 1."""
    e2 = math.exp(2.0)
    return 3.0 * (e2 + 1.0) / (4.0 * (e2 - 1.0))


def lambda0_lower_bound(tau0: float, mu_i1: float) -> float:
    """The threshold lower bound -tau0 sinh^2(1)/mu_{i_1} (> 0)."""
    if not tau0 < 0.0:
        raise ValidationError("tau0 must be negative")
    if not mu_i1 > 0.0:
        raise ValidationError("mu_{i_1} must be positive")
    return -tau0 * math.sinh(1.0) ** 2 / mu_i1


def lambda0_bound_fixed_point(
    params: ModelParams, mu_i1: float, provider, cfg: NumericsConfig | None = None,
    iterations: int = 3,
) -> tuple[float, list[float]]:
    """Self-consistent evaluation of the lower bound: tau0 depends on lambda,
    so iterate b <- -tau0(b) sinh^2(1)/mu starting from lambda = 1."""
    cfg = cfg or NumericsConfig()
    lam = 1.0
    history: list[float] = []
    bound = math.nan
    for _ in range(iterations):
        pairs = radial_spectrum(provider(lam), params, n_eigs=2, cfg=cfg)
        bound = lambda0_lower_bound(pairs[0].eigenvalue, mu_i1)
        history.append(bound)
        lam = bound
    return bound, history


# ----------------------------------------------------------------------------
# the two integral inequalities
# ----------------------------------------------------------------------------

def weighted_boundary_inequality_check(
    g: RadialProfile, N: int, lambda_w: float, r: float,
    quad_tol: float = 1e-8,
) -> tuple[float, float]:
    """Both sides of the weighted boundary inequality

        S^(N-2)(r) g(r)^2 <= (1/lam) int_r^inf g'^2 S^(N-1)
                             + (2 - N + lam) int_r^inf g^2 S^(N-3).

    g must be smooth with compact support on the right (g(r_max) = 0); the
    test point r may sit inside the support.  Violation raises.
    """
    if not lambda_w > 0.0 or not r > 0.0:
        raise ValidationError("lambda_w and r must be positive")
    if abs(g.values[-1]) > 1e-14 * max(np.abs(g.values).max(), 1e-300):
        raise ValidationError("g must vanish at the right end (compact support)")
    if r < g.r0:
        raise ValidationError("test point below the support grid")
    x = np.linspace(r, g.r_max, 4001)
    gv = g.evaluate(x)
    gd = g.evaluate(x, derivative=True)
    lhs = float(np.sinh(r) ** (N - 2) * g.evaluate(r) ** 2)
    rhs = float(
        simpson(gd**2 * np.sinh(x) ** (N - 1), x=x) / lambda_w
        + (2.0 - N + lambda_w) * simpson(gv**2 * np.sinh(x) ** (N - 3), x=x)
    )
    if lhs > rhs + quad_tol:
        raise LemmaViolationError(f"weighted boundary inequality failed: {lhs} > {rhs}")
    return lhs, rhs


def trace_inequality_check(
    modes: list[ModeFunction], R: float, params: ModelParams,
    quad_tol: float = 1e-8,
) -> tuple[float, float]:
    """Both sides of the symmetric trace inequality

        (1/S(R)) int_{boundary} psi^2 <= 3/(4(N-1)) int |grad psi|^2

    for psi a sum of modes whose eigenvalues clear (4/9)(N+2)(N-1).
    """
    from .harmonics import g1_mu_bound

    if not modes:
        raise ValidationError("need at least one mode")
    N = params.N
    mu_min = g1_mu_bound(N)
    lhs = 0.0
    grad = 0.0
    for m in modes:
        mu = sphere_eigenvalue(m.degree, N)
        if mu < mu_min * (1.0 - 1e-12):
            raise ValidationError(
                f"mode degree {m.degree} has mu={mu} below the bound {mu_min}"
            )
        prof = m.radial
        if abs(prof.r0 - R) > 1e-12:
            raise ValidationError("mode radial parts must start at R")
        x = prof.grid.nodes
        lhs += np.sinh(R) ** (N - 2) * prof.values[0] ** 2
        body = simpson(prof.derivatives**2 * np.sinh(x) ** (N - 1), x=x)
        body += mu * simpson(prof.values**2 * np.sinh(x) ** (N - 3), x=x)
        g = prof.decay_exponent
        amp = prof.values[-1] ** 2
        body += _tail_any_weight(N - 1, prof.r_max, 2 * g, g * g * amp)
        body += mu * _tail_any_weight(N - 3, prof.r_max, 2 * g, amp)
        grad += body
    rhs = 3.0 / (4.0 * (N - 1.0)) * grad
    if lhs > rhs + quad_tol:
        raise LemmaViolationError(f"trace inequality failed: {lhs} > {rhs}")
    return float(lhs), float(rhs)
