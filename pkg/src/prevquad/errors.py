"""Exception types raised across the package."""


class PrevquadError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(PrevquadError):
    """Inputs disagree on the measurement dimension m."""


class EmptyClass(PrevquadError):
    """A training class has no samples."""


class NonFiniteCoordinate(PrevquadError):
    """A measurement coordinate is NaN or infinite (or became so)."""


class InsufficientSamples(PrevquadError):
    """Too few samples for the requested statistic (e.g. a covariance)."""


class DegenerateMeans(PrevquadError):
    """Class means coincide; no separating direction exists."""


class NonFiniteLoss(PrevquadError):
    """The objective returned NaN/Inf and recovery failed."""


class DegenerateSeparation(PrevquadError):
    """Indicator rates of the two training classes are (numerically) equal."""


class ConstraintNotSatisfied(PrevquadError):
    """Penalty escalation exhausted its budget with residual violation."""

    def __init__(self, violation: float):
        self.violation = violation
        super().__init__(
            f"monotonicity violation {violation:.3e} above tolerance after "
            "penalty escalation"
        )


class NonMonotoneFamily(PrevquadError):
    """Assigned class decreases somewhere along the prevalence grid."""


class IndeterminateAccuracy(PrevquadError):
    """Local accuracy is 0/0 for this (prevalence, level) combination."""


class BothZero(PrevquadError):
    """Both conditional densities are zero; the point carries no mass."""


class ParseError(PrevquadError):
    """Malformed CSV input."""


class UnknownLabelValue(PrevquadError):
    """Label column contains a value other than 0 or 1."""


class IoError(PrevquadError):
    """File could not be read or written."""


class UnsupportedDimension(PrevquadError):
    """Operation is only defined for a specific dimension (e.g. contours, m=2)."""
