"""Exception and warning types used across the package."""


class CsCoxError(Exception):
    """Base class for all package errors."""


class NonFiniteValue(CsCoxError):
    """A duration or covariate is NaN or infinite."""


class BadStatusCode(CsCoxError):
    """A status code is outside {0, 1, 2}."""


class InconsistentCovariateDim(CsCoxError):
    """Records carry covariate vectors of different lengths."""


class NoUncensoredEvents(CsCoxError):
    """The dataset contains no exactly observed lifetime (status 0)."""


class TruncationInfeasible(CsCoxError):
    """The requested truncation leaves no empirical risk mass at the bound."""


class ZeroRiskSet(CsCoxError):
    """A hazard jump has a zero denominator; the truncation is too wide."""

    def __init__(self, time):
        self.time = time
        super().__init__(f"zero risk denominator at jump time {time!r}")


class DegenerateCurrentStatus(CsCoxError):
    """A current-status record precedes every event time, so its
    likelihood term is log(0)."""

    def __init__(self, index):
        self.index = index
        super().__init__(f"current-status record {index} has an empty inner integral")


class NumericOverflow(CsCoxError):
    """Defensive: an intermediate quantity left the representable range."""


class MissingJumpAtEvent(CsCoxError):
    """The supplied hazard has no jump at an observed event time."""

    def __init__(self, index, time):
        self.index = index
        self.time = time
        super().__init__(f"hazard has no jump at event time {time!r} (record {index})")


class BootstrapDegenerate(CsCoxError):
    """More than the tolerated share of bootstrap replicates failed."""


class InsufficientReplicates(CsCoxError):
    """Too few bootstrap replicates for interval construction."""


class QuadratureFailure(CsCoxError):
    """Numerical integration did not reach the requested tolerance."""


class SchemaError(CsCoxError):
    """A data file does not conform to the expected schema."""

    def __init__(self, row, column, message):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: {message}")


class IoError(CsCoxError):
    """Wrapper for OS-level failures while reading or writing results."""


class DegenerateDesignWarning(UserWarning):
    """Covariate sample variance matrix is not positive definite."""


class ClampedProbabilityWarning(UserWarning):
    """An estimated probability was clamped into its admissible range."""


class CurveClampedWarning(UserWarning):
    """A product-integral factor fell below zero and was clamped."""


class DroppedTermsWarning(UserWarning):
    """Current-status records ahead of every event time were dropped
    from the criterion."""


class NonConvergenceWarning(UserWarning):
    """The optimizer stopped before reaching the gradient tolerance."""
