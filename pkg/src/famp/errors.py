"""Exception hierarchy shared across the toolkit."""


class FampError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(FampError):
    """A config object violates its invariants (bad gains, counts, paths)."""


class ShapeError(FampError):
    """Inputs disagree in grid, dimension, or length."""


class NumericError(FampError):
    """A numeric routine produced non-finite values or an unusable matrix."""


class IllConditionedError(NumericError):
    """Normal equations are rank deficient; regularize to proceed."""


class InsufficientDataError(FampError):
    """Fewer records/vectors than the operation requires."""


class DatasetFormatError(FampError):
    """A dataset or model file is malformed; message names the bad field."""


class SchemaVersionError(DatasetFormatError):
    """File schema version is not supported by this build."""


class ExtrapolationError(FampError):
    """A target grid extends beyond the source record's duration."""


class EmptySelectionError(FampError):
    """Dimension selection was invoked on all-zero deviations."""


class ReplanRejected(FampError):
    """Replanning preconditions (active trigger, elapsed cooldown) not met."""


class GenerationError(FampError):
    """A scripted demonstration failed to complete its task."""


class EnvironmentFault(FampError):
    """The simulated environment produced an unrecoverable state."""
