"""Exception hierarchy shared by all solver modules.

The split mirrors the CLI exit codes: validation problems (bad inputs,
unsupported configurations) are distinct from solver failures (a numerical
method did not converge), which are distinct from violations (a mathematical
property the solvers are supposed to certify came out false).
"""

from __future__ import annotations


class HypExteriorError(Exception):
    """Base class for all package errors."""


class ValidationError(HypExteriorError):
    """Invalid parameters, incompatible objects, or unsupported configuration."""


class IncompatibleGridError(ValidationError):
    """Two profiles that must share a grid do not."""


class SolverError(HypExteriorError):
    """A numerical method failed to produce an acceptable answer."""


class NoBracketError(SolverError):
    """Shooting could not bracket the target slope within the allowed doublings."""


class ConvergenceError(SolverError):
    """An iteration (bisection, Newton, refinement) stalled above tolerance."""


class OracleFailureError(SolverError):
    """An independent cross-check solver failed; never silently ignored."""


class DegeneracyError(SolverError):
    """A linear solve hit a (near-)singular system, flagging proximity to a
    spectrum point of the underlying operator."""


class LemmaViolationError(HypExteriorError):
    """A property that the underlying theory guarantees failed numerically."""


class MorseIndexViolationError(LemmaViolationError):
    """The radial linearized operator did not show exactly one negative eigenvalue."""


class CertificateFailureError(HypExteriorError):
    """A bifurcation certificate stage failed (reported, usually not raised)."""
