"""Exception types raised across the package."""


class PolwalkError(ValueError):
    """Base class for all package errors."""


class NormLossError(PolwalkError):
    """Support pruning would discard a non-negligible amount of probability."""


class DegenerateEncodingError(PolwalkError):
    """The encoded qubit is the zero vector for this basis row."""


class RatioUndefinedError(PolwalkError):
    """Both denominators of the R-ratio vanish, i.e. C1 is (numerically) zero.

    The measurement is still informative: it says the encoded C1 amplitude is
    zero, which is a homogeneous linear constraint on the coefficients.
    ``fallback`` names that constraint so callers can substitute it.
    """

    fallback = "c1_zero"


class UnderdeterminedSystemError(PolwalkError):
    """Not enough independent rows to pin down a one-dimensional null space."""


class AmbiguousNullSpaceError(PolwalkError):
    """The null space has dimension > 1 (to working precision)."""


class PlanningError(PolwalkError):
    """No set of well-conditioned run angles could be found."""


class WeightRecoveryError(PolwalkError):
    """The weight-recovery analysis angle makes one projection vanish."""


class ReconstructionError(PolwalkError):
    """A pipeline stage failed; ``stage`` names which one."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
