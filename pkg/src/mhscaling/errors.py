"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConcaveRegionError(DomainError):
    """Raised by tuning rules when the mean curvature is nonpositive.

    No finite step scale is optimal in this regime: the entropy production
    keeps growing with the proposal scale.  Callers that must keep a chain
    running should apply a configured cap instead of solving for an optimum.
    """


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested accuracy."""
