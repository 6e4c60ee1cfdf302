"""Exception hierarchy.

Every error raised by the library derives from :class:`MinkLabError`, so
callers (and the command line driver) can map failure classes to exit codes.
"""


class MinkLabError(Exception):
    """Base class for all library errors."""


class InvalidSpec(MinkLabError, ValueError):
    """Body parameters violate their family constraints."""


class ZeroVector(MinkLabError, ValueError):
    """A gauge was evaluated at the origin."""


class DegenerateHessian(MinkLabError, ArithmeticError):
    """The energy Hessian failed the positive definiteness floor."""


class SingularMetric(MinkLabError, ArithmeticError):
    """The Riemann-Finsler metric could not be inverted."""


class UnsupportedKind(MinkLabError, ValueError):
    """Quadrature kind is not available in this dimension."""


class QuadratureFailure(MinkLabError, ArithmeticError):
    """Base class for failures while integrating over an indicatrix."""


class NonFiniteIntegrand(QuadratureFailure):
    """An integrand or volume density was not finite at some node."""


class NotZeroHomogeneous(QuadratureFailure):
    """The integrand failed the zero-homogeneity spot check."""


class SingularGamma(MinkLabError, ArithmeticError):
    """An averaged inner product failed its SPD check."""


class NotAFinslerNorm(MinkLabError, ArithmeticError):
    """A Randers perturbation has sup norm >= 1."""


class NotAnIsometry(MinkLabError, ValueError):
    """A matrix passed as a linear isometry does not preserve the gauge."""


class BasePointOutside(MinkLabError, ValueError):
    """A Funk base point is not inside the guarded interior of the body."""


class DegenerateTangent(MinkLabError, ArithmeticError):
    """Could not build a full-rank basis of an indicatrix tangent space."""


class NotPositiveDefinite(MinkLabError, ArithmeticError):
    """A matrix that must be positive definite is not."""


class BoundViolation(MinkLabError, ArithmeticError):
    """The area ratio escaped its two-sided bound."""


class DidNotConverge(MinkLabError, RuntimeError):
    """An iterative method ran out of iterations."""
