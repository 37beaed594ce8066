"""Exception types shared across the workbench."""


class AntiwattError(Exception):
    """Base class for all antiwatt-specific errors."""


class CapabilityError(AntiwattError):
    """A required host capability is missing (e.g. no powercap sysfs).

    Raised instead of a crash so callers can direct users to the
    simulated backend.
    """


class SingularDesignError(AntiwattError):
    """The regression design matrix is rank deficient.

    Carries the name (or index) of the offending column.
    """

    def __init__(self, column: str, message: str | None = None):
        self.column = column
        super().__init__(message or f"design matrix is singular; offending column: {column}")


class UndefinedStatisticError(AntiwattError):
    """A statistic is undefined for the given input (e.g. zero variance)."""


class DegenerateInferenceError(AntiwattError):
    """Coefficient inference is impossible (zero standard error with nonzero estimate)."""


class TrialError(AntiwattError):
    """A trial stage failed. Carries the stage name for the artifact record."""

    def __init__(self, stage: str, cause: str):
        self.stage = stage
        self.cause = cause
        super().__init__(f"trial failed at stage '{stage}': {cause}")


class EmptyAlignmentError(AntiwattError):
    """No rows survived trace alignment and exclusion rules."""


class ProcessVanishedError(AntiwattError):
    """The monitored target process no longer exists."""
