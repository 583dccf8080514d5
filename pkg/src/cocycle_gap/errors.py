"""Exception types shared across the package."""


class CocycleGapError(Exception):
    """Base class for all package errors."""


class SingularMatrix(CocycleGapError):
    """Matrix is singular, or too ill-conditioned to treat as invertible."""


class EigenSolverFailure(CocycleGapError):
    """The eigenvalue iteration did not converge."""


class GapTooSmall(CocycleGapError):
    """A singular-value gap is below tolerance, so the requested singular
    subspace is ill-defined.  Carries the offending gap value."""

    def __init__(self, gap, message=None):
        self.gap = float(gap)
        super().__init__(message or f"singular-value gap {self.gap:.3e} below tolerance")


class DimensionMismatch(CocycleGapError):
    """Operands live in different ambient dimensions."""


class InadmissibleWord(CocycleGapError):
    """Word contains a transition forbidden by the adjacency matrix."""


class NotPrimitive(CocycleGapError):
    """Operation requires a primitive adjacency matrix."""


class NotInBall(CocycleGapError):
    """Element not found within the requested Cayley-ball radius."""

    def __init__(self, radius, message=None):
        self.radius = int(radius)
        super().__init__(message or f"element not found within radius {self.radius}")


class BudgetExceeded(CocycleGapError):
    """Requested enumeration would exceed the configured budget."""

    def __init__(self, required, budget, message=None):
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(
            message
            or f"scan requires {self.required} word evaluations, budget is {self.budget}"
        )


class RelationViolated(CocycleGapError):
    """Generator images do not satisfy a defining relation of the presentation."""


class ParseError(CocycleGapError):
    """Expression or problem file could not be parsed.  Carries a location."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{message} (at position {location})"
        super().__init__(message)


class ValidationError(CocycleGapError):
    """Problem file parsed but failed semantic validation."""
