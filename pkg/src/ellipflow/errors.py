"""Exception taxonomy shared by all ellipflow modules."""
from __future__ import annotations


class EllipflowError(Exception):
    """Base class for every error raised by this package."""


# --- lattice / special functions ---

class CollinearPeriods(EllipflowError):
    """Period ratio is real (or numerically indistinguishable from real)."""


class ToleranceUnreachable(EllipflowError):
    """A truncated sum cannot meet the requested tolerance within its cap."""


class PoleAtLatticePoint(EllipflowError):
    """Argument coincides with a lattice point where the function has a pole
    (or, for log sigma, a logarithmic singularity)."""


class NoConvergence(EllipflowError):
    """An iterative solver (Newton, bisection, adaptive quadrature) failed."""


class DivisorMismatch(EllipflowError):
    """Zero and pole multisets have different sizes."""


class NotPrincipal(EllipflowError):
    """Zero/pole sums do not differ by a lattice point, so no elliptic
    function with that divisor exists."""


# --- jets ---

class DivisionByZeroGerm(EllipflowError):
    """Jet division or negative power with a vanishing constant term."""


# --- integrator ---

class StepUnderflow(EllipflowError):
    """Step size control drove the step below the representable minimum."""


class MaxStepsExceeded(EllipflowError):
    """Accepted-step budget exhausted before reaching the end time."""


class RhsFailure(EllipflowError):
    """Right-hand side returned non-finite values."""


# --- parameter families ---

class ParameterCollision(EllipflowError):
    """Two evolving parameters came closer than the collision threshold."""


class DegenerateCriticalPoint(EllipflowError):
    """Second derivative at a critical point is numerically zero, so the
    linearized motion is undefined."""


class LatticeDegenerate(EllipflowError):
    """Evolving period left the admissible half-plane (Im omega2 too small)."""


class ContourBlocked(EllipflowError):
    """No pole-avoiding integration contour was found."""


# --- triangle / sheet partition ---

class DegenerateTriangle(EllipflowError):
    """Branch points are collinear or coincident."""


class PoleHit(EllipflowError):
    """Evaluation point coincides with a pole of the uniformizer."""


class BranchPathCrossesSingularity(EllipflowError):
    """Integration path passes through a branch point of the integrand."""


class SingularPoint(EllipflowError):
    """Evaluation at a logarithmic singularity of the sheet potential."""


# --- configuration and I/O ---

class ParseError(EllipflowError):
    """Input file is not syntactically valid."""


class SchemaError(EllipflowError):
    """Input parses but has missing/unknown keys or a bad schema version."""


class ValidationError(EllipflowError):
    """Input is well-formed but violates a documented invariant."""


class IoError(EllipflowError):
    """Filesystem failure while reading or writing."""
