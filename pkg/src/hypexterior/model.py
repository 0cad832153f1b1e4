"""Problem parameters, hyperbolic-geometry primitives, radial grids and profiles.

Everything downstream works on the exterior of a geodesic ball in the
hyperbolic space of curvature -1, written in geodesic polar coordinates.
The radial volume weight is sinh(r)^(N-1) and the radial Laplacian drift is
(N-1)*coth(r).  Profiles live on a truncated grid [r0, r_max]; beyond r_max
they are continued by their exponential tail model, and quadratures add the
closed-form tail contribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.integrate import simpson

from .errors import IncompatibleGridError, ValidationError

__all__ = [
    "ModelParams",
    "NumericsConfig",
    "RadialGrid",
    "RadialProfile",
    "metric_factors",
    "decay_exponent_nonlinear",
    "decay_exponent_linearized",
    "unstable_exponent",
    "default_r_max",
    "weighted_l2_inner",
    "weighted_power_inner",
    "tail_weighted_integral",
]


@dataclass(frozen=True)
class ModelParams:
    """Dimension N and nonlinearity exponent p of the Schrodinger problem.

    The exponent must be Sobolev-subcritical: 1 < p < (N+2)/(N-2) for N >= 3
    and 1 < p < infinity for N = 2.
    """

    N: int
    p: float

    def __post_init__(self) -> None:
        if not isinstance(self.N, (int, np.integer)) or self.N < 2:
            raise ValidationError(f"dimension N must be an integer >= 2, got {self.N!r}")
        if not self.p > 1.0:
            raise ValidationError(f"exponent p must exceed 1, got {self.p}")
        if self.N >= 3 and self.p >= self.p_critical:
            raise ValidationError(
                f"supercritical exponent: p={self.p} >= (N+2)/(N-2)={self.p_critical} for N={self.N}"
            )

    @property
    def p_critical(self) -> float:
        """Sobolev-critical exponent (N+2)/(N-2); infinity for N = 2."""
        return math.inf if self.N == 2 else (self.N + 2) / (self.N - 2)

    @property
    def peak_lower_bound(self) -> float:
        """Energy lower bound ((p+1)/2)^(1/(p-1)) for any interior critical value."""
        return ((self.p + 1.0) / 2.0) ** (1.0 / (self.p - 1.0))


# Ceiling factor on top of the peak lower bound; 10x (as first guessed) clips
# the true p=1.5 solutions, whose peaks reach ~10x the bound.
_CEILING_FACTOR = 100.0


@dataclass(frozen=True)
class NumericsConfig:
    """Discretization and tolerance knobs shared by every solver.

    r_max=None means "use the decay-based default" r0 + max(30, 40/gamma);
    w_ceiling=None means 100x the peak lower bound of the current exponent.
    """

    r_max: float | None = None
    grid_points: int = 40001
    ode_rel_tol: float = 1e-11
    ode_abs_tol: float = 1e-13
    shoot_tol: float = 1e-7
    max_bisect: int = 200
    w_ceiling: float | None = None
    quad_tol: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("ode_rel_tol", "ode_abs_tol", "shoot_tol", "quad_tol"):
            if not getattr(self, name) > 0.0:
                raise ValidationError(f"{name} must be positive")
        if self.grid_points < 64:
            raise ValidationError("grid_points must be >= 64")
        if self.max_bisect < 1:
            raise ValidationError("max_bisect must be >= 1")
        if self.r_max is not None and self.r_max <= 0.0:
            raise ValidationError("r_max must be positive when given")

    def with_(self, **kwargs: Any) -> "NumericsConfig":
        """Copy with some fields replaced."""
        return replace(self, **kwargs)

    def ceiling(self, params: ModelParams) -> float:
        """Blow-up threshold for shooting trajectories."""
        if self.w_ceiling is not None:
            return self.w_ceiling
        return _CEILING_FACTOR * params.peak_lower_bound

    def resolve_r_max(self, r0: float, gamma: float) -> float:
        """Outer truncation radius for a profile starting at r0 decaying at rate gamma."""
        if self.r_max is not None:
            if self.r_max <= r0:
                raise ValidationError(f"configured r_max={self.r_max} is not beyond r0={r0}")
            return self.r_max
        return default_r_max(r0, gamma)


def default_r_max(r0: float, gamma: float) -> float:
    """Decay-based truncation: the neglected tail mass is ~exp(-2*gamma*(r_max-r0))."""
    return r0 + max(30.0, 40.0 / gamma)


def metric_factors(r: float) -> tuple[float, float, float]:
    """Return (sinh r, cosh r, coth r) for r > 0.

    These are the only metric quantities the solvers need: sinh^(N-1) is the
    volume weight and (N-1)*coth is the radial drift of the Laplacian.
    """
    if not r > 0.0:
        raise ValidationError(f"metric factors need r > 0, got {r}")
    s, c = math.sinh(r), math.cosh(r)
    return s, c, c / s


def decay_exponent_nonlinear(params: ModelParams, lam: float) -> float:
    """Far-field decay rate gamma(lam) of the nonlinear ground state.

    Solves lam*(gamma^2 - (N-1)*gamma) = 1, i.e.

        gamma(lam) = ((N-1) + sqrt((N-1)^2 + 4/lam)) / 2.

    At lam = 1 this is the classical (N-1+sqrt(4+(N-1)^2))/2 and satisfies
    gamma^2 = 1 + (N-1)*gamma.  Always exceeds N-1, which makes weighted
    tails integrable.
    """
    if not lam > 0.0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    n1 = params.N - 1.0
    return 0.5 * (n1 + math.sqrt(n1 * n1 + 4.0 / lam))


def decay_exponent_linearized(params: ModelParams, lam: float, tau: float) -> float:
    """Indicial decay rate of the linearized tail equation at spectral shift tau.

    The far field of -lam*Delta + (1 - tau) gives
    ((N-1) + sqrt((N-1)^2 + 4*(1-tau)/lam))/2; requires 1 - tau > 0 (decaying
    regime).  Reduces to decay_exponent_nonlinear at tau = 0.
    """
    if not lam > 0.0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    if not 1.0 - tau > 0.0:
        raise ValidationError(f"no decaying tail for tau={tau} >= 1")
    n1 = params.N - 1.0
    return 0.5 * (n1 + math.sqrt(n1 * n1 + 4.0 * (1.0 - tau) / lam))


def unstable_exponent(params: ModelParams, lam: float = 1.0) -> float:
    """Growth rate of the unstable far-field mode, (-(N-1)+sqrt((N-1)^2+4/lam))/2."""
    n1 = params.N - 1.0
    return 0.5 * (-n1 + math.sqrt(n1 * n1 + 4.0 / lam))


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing nodes on [r0, r_max]."""

    nodes: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValidationError("grid needs at least two nodes")
        if not np.all(np.diff(nodes) > 0.0):
            raise ValidationError("grid nodes must be strictly increasing")

    @classmethod
    def uniform(cls, r0: float, r_max: float, n: int) -> "RadialGrid":
        if r_max <= r0:
            raise ValidationError(f"r_max={r_max} must exceed r0={r0}")
        return cls(np.linspace(r0, r_max, n))

    @property
    def r0(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    def __len__(self) -> int:
        return self.nodes.size

    def matches(self, other: "RadialGrid") -> bool:
        return self.nodes.size == other.nodes.size and np.array_equal(self.nodes, other.nodes)


class RadialProfile:
    """A sampled radial function with derivative data and a tail model.

    Between nodes the profile is the cubic Hermite interpolant of
    (values, derivatives); beyond r_max it is values[-1]*exp(-decay_exponent*
    (r - r_max)).  Evaluation below r0 is a domain error.  `meta` carries
    solver provenance (N, p, lambda, R, residuals, ...).
    """

    def __init__(
        self,
        grid: RadialGrid,
        values: np.ndarray,
        derivatives: np.ndarray,
        decay_exponent: float,
        weight_power: int,
        meta: dict[str, Any] | None = None,
    ) -> None:
        values = np.asarray(values, dtype=float)
        derivatives = np.asarray(derivatives, dtype=float)
        if values.shape != grid.nodes.shape or derivatives.shape != grid.nodes.shape:
            raise ValidationError("values, derivatives and grid must have equal length")
        if not decay_exponent > 0.0:
            raise ValidationError("decay_exponent must be positive")
        self.grid = grid
        self.values = values
        self.derivatives = derivatives
        self.decay_exponent = float(decay_exponent)
        self.weight_power = int(weight_power)
        self.meta: dict[str, Any] = dict(meta or {})

    @property
    def r0(self) -> float:
        return self.grid.r0

    @property
    def r_max(self) -> float:
        return self.grid.r_max

    @property
    def lam(self) -> float | None:
        return self.meta.get("lam")

    def _hermite(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = self.grid.nodes
        idx = np.clip(np.searchsorted(x, r, side="right") - 1, 0, x.size - 2)
        x0, x1 = x[idx], x[idx + 1]
        h = x1 - x0
        t = (r - x0) / h
        t2, t3 = t * t, t * t * t
        y0, y1 = self.values[idx], self.values[idx + 1]
        d0, d1 = self.derivatives[idx], self.derivatives[idx + 1]
        val = (
            (2 * t3 - 3 * t2 + 1) * y0
            + (t3 - 2 * t2 + t) * h * d0
            + (-2 * t3 + 3 * t2) * y1
            + (t3 - t2) * h * d1
        )
        der = (
            (6 * t2 - 6 * t) / h * y0
            + (3 * t2 - 4 * t + 1) * d0
            + (6 * t - 6 * t2) / h * y1
            + (3 * t2 - 2 * t) * d1
        )
        return val, der

    def evaluate(self, r: float | np.ndarray, derivative: bool = False) -> np.ndarray | float:
        """Evaluate the profile (or its derivative) at r >= r0."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r_arr < self.r0 - 1e-12):
            raise ValidationError(f"evaluation below r0={self.r0}")
        val = np.empty_like(r_arr)
        der = np.empty_like(r_arr)
        inside = r_arr <= self.r_max
        if inside.any():
            v, d = self._hermite(np.clip(r_arr[inside], self.r0, self.r_max))
            val[inside], der[inside] = v, d
        if (~inside).any():
            tail = self.values[-1] * np.exp(-self.decay_exponent * (r_arr[~inside] - self.r_max))
            val[~inside] = tail
            der[~inside] = -self.decay_exponent * tail
        out = der if derivative else val
        return out if np.ndim(r) else float(out[0])

    def __call__(self, r: float | np.ndarray) -> np.ndarray | float:
        return self.evaluate(r)

    def with_meta(self, **kwargs: Any) -> "RadialProfile":
        prof = RadialProfile(
            self.grid, self.values, self.derivatives, self.decay_exponent, self.weight_power,
            {**self.meta, **kwargs},
        )
        return prof


def _binomial_tail_integral(weight: int, r_start: float, rate: float, amplitude: float) -> float:
    """Closed form of integral_{r_start}^inf sinh(r)^weight * amplitude*e^{-rate*(r-r_start)} dr.

    For weight >= 0, expands sinh^weight binomially (converges iff
    rate > weight); for negative weights uses 1/sinh(r) ~ 2 e^{-r}
    (relative error O(e^{-2 r_start}), far below quadrature tolerances at
    the truncation radii in use).
    """
    if rate <= weight:
        raise ValidationError(
            f"tail integral diverges: decay rate {rate} <= weight power {weight}"
        )
    if weight < 0:
        k = -weight
        return amplitude * (2.0 * math.exp(-r_start)) ** k / (rate + k)
    total = 0.0
    for j in range(weight + 1):
        expo = weight - 2 * j
        coeff = math.comb(weight, j) * (-1.0) ** j
        # integral_0^inf e^{(expo - rate) t} dt = 1/(rate - expo), times e^{expo*r_start}
        total += coeff * math.exp(expo * r_start) / (rate - expo)
    return amplitude * total / 2.0**weight


def tail_weighted_integral(f: RadialProfile, g: RadialProfile, weight: int) -> float:
    """Analytic tail of integral sinh^weight f g dr beyond the common r_max."""
    rate = f.decay_exponent + g.decay_exponent
    amp = f.values[-1] * g.values[-1]
    if amp == 0.0:
        return 0.0
    return _binomial_tail_integral(weight, f.r_max, rate, amp)


def weighted_power_inner(f: RadialProfile, g: RadialProfile, weight: int) -> float:
    """integral sinh(r)^weight f g dr over [r0, inf): Simpson on the grid + analytic tail."""
    if not f.grid.matches(g.grid):
        raise IncompatibleGridError("profiles must share a grid")
    x = f.grid.nodes
    body = float(simpson(np.sinh(x) ** weight * f.values * g.values, x=x))
    return body + tail_weighted_integral(f, g, weight)


def weighted_l2_inner(f: RadialProfile, g: RadialProfile) -> float:
    """Volume-weighted L2 inner product integral sinh^(N-1) f g dr (plus tail)."""
    if f.weight_power != g.weight_power:
        raise IncompatibleGridError("profiles must share the volume weight power")
    return weighted_power_inner(f, g, f.weight_power)
