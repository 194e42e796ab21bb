"""Exception types shared across the package."""


class ConfineLabError(Exception):
    """Base class for all package-specific errors."""


class PointOutsideDomain(ConfineLabError):
    """The queried point is not strictly inside the open domain."""


class GridTooCoarse(ConfineLabError):
    """The grid does not resolve a boundary collar well enough."""


class NonRadialProfile(ConfineLabError):
    """A custom coefficient law could not be classified radially."""


class UnsupportedDomain(ConfineLabError):
    """No analytic rule is available for this domain/coefficient combination."""


class MissingInfinityRecord(ConfineLabError):
    """An unbounded-domain check was requested without infinity data."""


class WrongCodimension(ConfineLabError):
    """The boundary component does not have the codimension the reduction needs."""


class WrongComponentKind(ConfineLabError):
    """The reduction expects a different kind of boundary component."""


class InconclusiveEndpoints(ConfineLabError):
    """An endpoint classification came back inconclusive."""


class QuadratureFailure(ConfineLabError):
    """Numerical quadrature failed to produce a trustworthy value."""


class StiffIntegrationFailure(ConfineLabError):
    """The ODE integrator failed inside its tolerance budget."""


class InvalidSplit(ConfineLabError):
    """A weight factorization violates its invariants."""


class NonPositivePsi(ConfineLabError):
    """Manufactured solutions require a strictly positive reference function."""


class BarrierUndefined(ConfineLabError):
    """The confining barrier degenerates for this exponent combination."""


class PreconditionViolated(ConfineLabError):
    """A pointwise hypothesis failed at a sampled location."""


class LinearSolveFailure(ConfineLabError):
    """The sparse linear solve inside a time step failed."""
