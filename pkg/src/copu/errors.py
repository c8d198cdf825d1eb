"""Exception hierarchy. Everything derives from ``CopuError`` (a ``ValueError``)."""


class CopuError(ValueError):
    pass


class DimensionError(CopuError):
    pass


class NotHermitianError(CopuError):
    pass


class NotAStateError(CopuError):
    """Input is not a density matrix (negative eigenvalue, wrong trace, ...)."""


class TracePreservationError(CopuError):
    pass


class NotDiagonalError(CopuError):
    """The Bloch matrix ``M`` is not diagonal, so closed forms do not apply."""


class ConstraintError(CopuError):
    """Family parameters violate the normalization constraints."""


class UndefinedClassification(CopuError):
    """A classifier sits exactly on its boundary (e.g. cos 2phi = 0)."""


class UnknownFamilyError(CopuError):
    pass


class SpecError(CopuError):
    """Malformed channel-spec document."""


class DegenerateDesignError(CopuError):
    """Least-squares fit has a rank-deficient design (e.g. collinear samples)."""


class NotCompletelyPositiveError(ConstraintError):
    """Affine data that fails the complete-positivity test."""
