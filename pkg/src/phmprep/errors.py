"""Exception hierarchy shared by all pipeline stages."""


class PhmPrepError(Exception):
    """Base class for all errors raised by this package."""


# --- ingest ---------------------------------------------------------------

class FileUnreadableError(PhmPrepError):
    pass


class MissingTimeColumnError(PhmPrepError):
    pass


class DuplicateTimestampError(PhmPrepError):
    def __init__(self, timestamp):
        self.timestamp = timestamp
        super().__init__(f"duplicate timestamp: {timestamp}")


class EmptyTableError(PhmPrepError):
    pass


class UnknownKindError(PhmPrepError):
    pass


class InvertedIntervalError(PhmPrepError):
    pass


class UnmappedCategoryError(PhmPrepError):
    pass


class ColumnNotFoundError(PhmPrepError):
    pass


# --- selection / reduction ------------------------------------------------

class UnknownFeatureError(PhmPrepError):
    pass


class AllColumnsDroppedError(PhmPrepError):
    pass


class TooFewRowsError(PhmPrepError):
    pass


class EmptyInputError(PhmPrepError):
    pass


# --- outliers -------------------------------------------------------------

class InvertedBoundsError(PhmPrepError):
    pass


class IoFailureError(PhmPrepError):
    pass


# --- prepare --------------------------------------------------------------

class DegradedEmptyError(PhmPrepError):
    pass


class HealthySmallerThanDegradedError(PhmPrepError):
    pass


class DegenerateFeatureError(PhmPrepError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"degenerate (constant) feature: {name}")


class FeatureMismatchError(PhmPrepError):
    pass


# --- labeling -------------------------------------------------------------

class LengthMismatchError(PhmPrepError):
    pass


# --- models ---------------------------------------------------------------

class SingleClassInputError(PhmPrepError):
    pass


class NonFiniteLossError(PhmPrepError):
    pass


class GridEmptyError(PhmPrepError):
    pass


class SpaceEmptyError(PhmPrepError):
    pass


# --- baselines ------------------------------------------------------------

class MissingValuesError(PhmPrepError):
    pass


class NonFiniteError(PhmPrepError):
    pass


class KTooLargeError(PhmPrepError):
    pass


# --- synth ----------------------------------------------------------------

class InfeasibleCorrelationError(PhmPrepError):
    pass


class ScheduleOverflowError(PhmPrepError):
    pass


# --- cli ------------------------------------------------------------------

class StageError(PhmPrepError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
