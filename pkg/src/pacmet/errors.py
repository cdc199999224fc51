"""Exception types shared across the package."""


class PacmetError(Exception):
    """Base class for all package-specific errors."""


class NonHermitianError(PacmetError):
    """Input matrix violates Hermiticity beyond tolerance."""


class DimensionMismatchError(PacmetError):
    """Operands act on spaces of different dimension."""


class DomainError(PacmetError):
    """A scalar function is undefined on part of the spectrum it is applied to."""


class SupportViolationError(PacmetError):
    """supp(rho) is not contained in supp(sigma) where required."""


class PeriodMismatchError(PacmetError):
    """Eigenvalue differences are incompatible with the requested periodic domain."""


class WindowTooCoarseError(PacmetError):
    """Window radius is below the grid spacing."""


class GridMismatchError(PacmetError):
    """Family and measurement grids do not line up."""


class SolverDivergedError(PacmetError):
    """Barrier Newton iteration failed to converge."""


class SizeGuardError(PacmetError):
    """Problem size exceeds the dense-solve guard."""


class UnreachableTargetError(PacmetError):
    """Requested success probability cannot be reached on the admissible range."""


class NoValidPairError(PacmetError):
    """No grid pair is separated by more than twice the tolerance."""


class ShiftOverlapError(PacmetError):
    """Hypothesis shifts are closer than twice the tolerance."""


class KrausIncompleteError(PacmetError):
    """Kraus operators do not satisfy the completeness relation."""


class ZeroAcceptanceError(PacmetError):
    """On-diagonal acceptance vanishes; small-eta expansion undefined."""


class PositivityViolationError(PacmetError):
    """Numerically computed top eigenvector has a significantly negative entry."""


class DeltaRangeError(PacmetError):
    """Window radius outside the admissible range for this formula."""


class SaturatedError(PacmetError):
    """All error probabilities are numerically saturated; rate fit impossible."""
