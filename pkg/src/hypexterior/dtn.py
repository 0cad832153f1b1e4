"""The linearized normal-derivative operator on boundary data.

For boundary data expanded in invariant spherical harmonics, the Dirichlet
extension into the exterior domain separates into radial two-point problems

    -lam (c'' + (N-1) coth(r) c') + lam mu/sinh^2(r) c + (1 - p u^(p-1)) c = 0,
    c(1) = 1,   c decaying,

one per invariant degree.  The operator acts mode-wise with eigenvalues

    sigma(lam) = -(c'(1) + (N-1) coth(1)),

so its action, self-adjointness, and spectrum all reduce to these solves.
A boundary-trace-normalized Steklov minimization over a finite-element space
provides the independent variational value of sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import DegeneracyError, ValidationError
from .harmonics import GroupSpectrum, sphere_eigenvalue
from .model import (
    ModelParams,
    NumericsConfig,
    RadialGrid,
    RadialProfile,
    decay_exponent_linearized,
    metric_factors,
)
from .spectral import ModeFunction

__all__ = [
    "BoundaryFunction",
    "SigmaCurve",
    "solve_mode_ode",
    "sigma_eigenvalue",
    "apply_H",
    "dirichlet_extension",
    "sigma_curve",
    "variational_sigma",
    "boundary_constant",
]


def boundary_constant(N: int) -> float:
    """(N-1)(e^2+1)/(e^2-1), i.e. (N-1) coth(1) -- the operator's zero-order term."""
    _, _, coth1 = metric_factors(1.0)
    return (N - 1.0) * coth1


@dataclass
class BoundaryFunction:
    """Mean-zero boundary data: coefficients over invariant eigenspaces,
    degree 0 absent.  modes is a tuple of (degree, coefficient-array)."""

    modes: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self) -> None:
        cleaned = []
        last = 0
        for degree, coeffs in self.modes:
            if degree < 1:
                raise ValidationError("boundary data must be mean-zero (degree >= 1)")
            if degree <= last:
                raise ValidationError("mode degrees must be strictly increasing")
            last = degree
            cleaned.append((int(degree), np.atleast_1d(np.asarray(coeffs, dtype=float))))
        self.modes = tuple(cleaned)

    def validate_against(self, spectrum: GroupSpectrum) -> None:
        for degree, coeffs in self.modes:
            entry = spectrum.entry_for(degree)
            if coeffs.size != entry.multiplicity:
                raise ValidationError(
                    f"degree {degree}: {coeffs.size} coefficients for multiplicity {entry.multiplicity}"
                )

    def inner(self, other: "BoundaryFunction") -> float:
        """L2(S^(N-1)) inner product via Parseval over the orthonormal modes."""
        lookup = dict(other.modes)
        total = 0.0
        for degree, coeffs in self.modes:
            oc = lookup.get(degree)
            if oc is not None and oc.size == coeffs.size:
                total += float(coeffs @ oc)
        return total

    def scaled(self, factors: dict[int, float]) -> "BoundaryFunction":
        return BoundaryFunction(
            tuple((d, factors[d] * c) for d, c in self.modes)
        )


@dataclass
class SigmaCurve:
    """Sampled map lambda -> sigma for one invariant degree."""

    degree: int
    samples: tuple[tuple[float, float], ...]
    lambda_floor: float | None = None  # the threshold bound the grid respects

    def __post_init__(self) -> None:
        lams = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValidationError("lambda samples must be strictly increasing")
        if self.lambda_floor is not None and lams and lams[0] <= self.lambda_floor:
            raise ValidationError("lambda samples must sit above the threshold bound")

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    def sign_change_brackets(self) -> list[tuple[float, float]]:
        """Adjacent sample pairs with opposite sigma signs."""
        out = []
        for (l0, s0), (l1, s1) in zip(self.samples, self.samples[1:]):
            if s0 == 0.0 or s1 == 0.0:
                continue
            if (s0 < 0.0) != (s1 < 0.0):
                out.append((l0, l1))
        return out

    def upcrossing_brackets(self) -> list[tuple[float, float]]:
        """Brackets with sigma negative on the left (the bifurcation pattern)."""
        return [
            (l0, l1)
            for (l0, l1) in self.sign_change_brackets()
            if dict(self.samples)[l0] < 0.0
        ]


def _mode_grid_points(cfg: NumericsConfig, r_max: float) -> int:
    # the one-sided boundary stencil needs spacing ~5e-4 to hold sigma to
    # a few 1e-5 even on the long large-lambda domains
    return max(cfg.grid_points, int((r_max - 1.0) / 5e-4) + 1)


def solve_mode_ode(
    degree: int, lam: float, u: RadialProfile, cfg: NumericsConfig | None = None,
    params: ModelParams | None = None, n_override: int | None = None,
) -> RadialProfile:
    """Decaying solution of the degree-mu radial mode problem with c(1) = 1.

    Second-order central differences with a Robin ghost closure at r_max from
    the linearized decay exponent; a direct banded solve.  An exploding or
    non-finite solution flags proximity to a spectral point (DegeneracyError).
    """
    cfg = cfg or NumericsConfig()
    params = params or ModelParams(u.meta["N"], u.meta["p"])
    if abs(u.r0 - 1.0) > 1e-12:
        raise ValidationError("mode problems are posed on [1, infinity)")
    mu = sphere_eigenvalue(degree, params.N)
    r_max = u.r_max
    n = n_override or _mode_grid_points(cfg, r_max)
    x = np.linspace(1.0, r_max, n)
    h = x[1] - x[0]
    uv = u.evaluate(x)
    pot = 1.0 - params.p * np.abs(uv) ** (params.p - 1.0)
    coth = 1.0 / np.tanh(x)
    n1 = params.N - 1.0
    sub = -lam / h**2 + lam * n1 * coth / (2.0 * h)    # coefficient of c_{j-1}
    diag = 2.0 * lam / h**2 + lam * mu / np.sinh(x) ** 2 + pot
    sup = -lam / h**2 - lam * n1 * coth / (2.0 * h)    # coefficient of c_{j+1}

    kappa = decay_exponent_linearized(params, lam, 0.0)
    m = n - 1  # unknowns c_1 .. c_{n-1}
    ab = np.zeros((3, m))
    rhs = np.zeros(m)
    ab[1, :] = diag[1:]
    ab[0, 1:] = sup[1:-1]
    ab[2, :-1] = sub[2:]
    rhs[0] = -sub[1] * 1.0
    # Robin ghost at the last node: c_n = c_{n-2} - 2 h kappa c_{n-1}
    ab[1, -1] = diag[-1] - 2.0 * h * kappa * sup[-1]
    ab[2, -2] = sub[-1] + sup[-1]
    sol = solve_banded((1, 1), ab, rhs)
    c = np.concatenate([[1.0], sol])
    if not np.all(np.isfinite(c)) or np.abs(c).max() > 1e8:
        raise DegeneracyError(
            f"mode solve at lambda={lam}, degree={degree} is near a spectral point"
        )
    from .spectral import _fd_derivative

    return RadialProfile(
        RadialGrid(x), c, _fd_derivative(c, h), kappa, params.N - 1,
        meta={"kind": "mode_solution", "N": params.N, "p": params.p,
              "lam": lam, "degree": degree, "mu": mu},
    )


def sigma_eigenvalue(
    degree: int, lam: float, u: RadialProfile, cfg: NumericsConfig | None = None,
    params: ModelParams | None = None, n_override: int | None = None,
) -> float:
    """Operator eigenvalue sigma = -(c'(1) + (N-1) coth(1)) at one degree.

    c'(1) by the one-sided second-order three-point stencil, matching the
    interior scheme's order.
    """
    cfg = cfg or NumericsConfig()
    params = params or ModelParams(u.meta["N"], u.meta["p"])
    c = solve_mode_ode(degree, lam, u, cfg, params, n_override=n_override)
    x = c.grid.nodes
    h = x[1] - x[0]
    cp1 = (-3.0 * c.values[0] + 4.0 * c.values[1] - c.values[2]) / (2.0 * h)
    return -(cp1 + boundary_constant(params.N))


def apply_H(
    v: BoundaryFunction, lam: float, u: RadialProfile,
    cfg: NumericsConfig | None = None, params: ModelParams | None = None,
) -> BoundaryFunction:
    """Apply the operator mode-wise: each degree block is scaled by its sigma."""
    factors = {d: sigma_eigenvalue(d, lam, u, cfg, params) for d, _ in v.modes}
    return v.scaled(factors)


def dirichlet_extension(
    v: BoundaryFunction, lam: float, u: RadialProfile,
    cfg: NumericsConfig | None = None, params: ModelParams | None = None,
    spectrum: GroupSpectrum | None = None, quad_tol: float = 1e-8,
) -> list[ModeFunction]:
    """Separated solution psi_v = sum c_k(r) (angular block) of the linearized
    Dirichlet problem with boundary data v.

    Asserts the two side conditions (orthogonality to the radial ground
    eigenfunction and mean-zero normal flux): both reduce to the vanishing
    angular means of degree >= 1 blocks, which is checked through the mode
    structure itself (degree 0 absent by construction).
    """
    cfg = cfg or NumericsConfig()
    params = params or ModelParams(u.meta["N"], u.meta["p"])
    if spectrum is not None:
        v.validate_against(spectrum)
    out = []
    for degree, coeffs in v.modes:
        c = solve_mode_ode(degree, lam, u, cfg, params)
        nrm = float(np.linalg.norm(coeffs))
        if nrm == 0.0:
            raise ValidationError(f"degree {degree} carries a zero coefficient block")
        prof = RadialProfile(
            c.grid, nrm * c.values, nrm * c.derivatives, c.decay_exponent,
            c.weight_power, meta=c.meta,
        )
        out.append(ModeFunction(prof, degree, coeffs / nrm))
    # side conditions: every block has degree >= 1, hence zero angular mean;
    # the weighted radial factors must at least be finite
    for mf in out:
        if not np.all(np.isfinite(mf.radial.values)):
            raise ValidationError("non-finite extension block")
    return out


def sigma_curve(
    degree: int, lambda_grid: np.ndarray, u_provider,
    cfg: NumericsConfig | None = None, params: ModelParams | None = None,
    lambda_floor: float | None = None,
) -> SigmaCurve:
    """Sample sigma over a strictly increasing lambda grid.

    u_provider maps lambda to the ground state u_lambda (e.g. a
    GroundStateCache); adjacent samples of opposite sign mark brackets.
    """
    cfg = cfg or NumericsConfig()
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValidationError("lambda grid must be strictly increasing with >= 2 points")
    samples = []
    for lam in grid:
        u = u_provider(lam)
        samples.append((float(lam), sigma_eigenvalue(degree, lam, u, cfg, params)))
    return SigmaCurve(degree, tuple(samples), lambda_floor)


# ----------------------------------------------------------------------------
# variational oracle: trace-normalized Steklov minimization, P1 elements
# ----------------------------------------------------------------------------

def variational_sigma(
    degree: int, lam: float, u: RadialProfile, cfg: NumericsConfig | None = None,
    params: ModelParams | None = None, n_elements: int | None = None,
) -> float:
    """sigma by direct minimization of the boundary-relaxed form over the
    degree block: min of the form over psi with unit boundary trace.

    Independent discretization path: piecewise-linear finite elements with
    per-cell Gauss quadrature (vs the finite-difference mode solve); the
    minimum is computed exactly through the Schur complement of the trace
    node.  Only meaningful above the mode threshold (the constrained form is
    unbounded below beneath it).
    """
    cfg = cfg or NumericsConfig()
    params = params or ModelParams(u.meta["N"], u.meta["p"])
    mu = sphere_eigenvalue(degree, params.N)
    r1 = u.r_max
    n = n_elements or max(int((r1 - 1.0) / 5e-4) + 1, 20001)
    x = np.linspace(1.0, r1, n)
    h = x[1] - x[0]
    N = params.N

    gq, gw = np.polynomial.legendre.leggauss(3)
    xm = 0.5 * (x[:-1] + x[1:])
    half = 0.5 * h
    diag = np.zeros(n)
    off = np.zeros(n - 1)
    for q, wq in zip(gq, gw):
        xq = xm + half * q
        sN1 = np.sinh(xq) ** (N - 1)
        uv = u.evaluate(xq)
        Vq = (1.0 - params.p * np.abs(uv) ** (params.p - 1.0)) / lam + mu / np.sinh(xq) ** 2
        phiL = (x[1:] - xq) / h
        phiR = (xq - x[:-1]) / h
        wcell = wq * half
        diag[:-1] += wcell * (sN1 / h**2 + sN1 * Vq * phiL**2)
        diag[1:] += wcell * (sN1 / h**2 + sN1 * Vq * phiR**2)
        off += wcell * (-sN1 / h**2 + sN1 * Vq * phiL * phiR)
    # decaying-tail energy beyond r1 collapses to S^(N-1)(r1) kappa psi(r1)^2
    kappa = decay_exponent_linearized(params, lam, 0.0)
    diag[-1] += math.sinh(r1) ** (N - 1) * kappa

    ab = np.zeros((3, n - 1))
    ab[1, :] = diag[1:]
    ab[0, 1:] = off[1:]
    ab[2, :-1] = off[1:]
    rhs = np.zeros(n - 1)
    rhs[0] = -off[0]
    interior = solve_banded((1, 1), ab, rhs)
    a_min = diag[0] + off[0] * interior[0]  # Schur complement at the trace node
    return float(a_min / math.sinh(1.0) ** (N - 1) - boundary_constant(N))
