"""Exception taxonomy for geometric and numerical failure modes."""


class GeometryError(Exception):
    """Base class for all billiardlab errors."""


class BoundaryMembershipError(GeometryError):
    """A point expected on a body boundary is not on it."""


class ConvergenceError(GeometryError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class DegenerateChordError(GeometryError):
    """Chord through a boundary point is tangential (no second intersection)."""


class DomainError(GeometryError):
    """Input outside the mathematical domain of the operation."""


class OriginNotInteriorError(DomainError):
    """Operation requires the origin strictly inside the body."""


class ConvexityViolationError(GeometryError):
    """Second fundamental form failed to be positive definite."""


class GrazingError(GeometryError):
    """Incidence too close to tangency for a reflection to be defined."""


class SolverError(GeometryError):
    """A reflection/involution solve produced no admissible solution."""


class SamplePlanError(GeometryError):
    """Sample plan cannot be realized (too few points, empty domain)."""


class DegenerateDataError(GeometryError):
    """Input data is rank deficient or has coincident entries."""


class PrecisionError(GeometryError):
    """Numerical extraction disagrees with itself beyond its error budget."""


class IndistinguishableError(GeometryError):
    """Two sampled maps agree to round-off on the whole grid."""


class FrameNormalizationError(GeometryError):
    """Germ is not in the normalized frame required by the construction."""


class PreconditionError(GeometryError):
    """Documented precondition of an operation is violated."""
