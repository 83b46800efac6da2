"""Exception hierarchy for the pipeline.

DataError subclasses map to CLI exit code 3; anything else unexpected
maps to 4. Usage problems are raised as UsageError (exit 2).
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(PipelineError):
    """Bad invocation: unknown flag value, missing input, conflicting options."""


class DataError(PipelineError):
    """Input data violates the format or protocol contract."""


class MissingColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"required column missing: {column!r}")
        self.column = column


class BadTaskLabel(DataError):
    def __init__(self, label: str, row: int):
        super().__init__(f"row {row}: unknown task label {label!r}")
        self.label = label
        self.row = row


class NonMonotonicTimestamp(DataError):
    def __init__(self, row: int, t: float, previous: float):
        super().__init__(
            f"row {row}: timestamp {t} not strictly greater than previous {previous}"
        )
        self.row = row
        self.t = t
        self.previous = previous


class EmptyTask(DataError):
    def __init__(self, task: str):
        super().__init__(f"no rows for task {task}")
        self.task = task


class NoTaskMarkers(DataError):
    def __init__(self, found: int):
        super().__init__(f"expected 5 or 6 task markers, found {found}")
        self.found = found


class ClockSkew(DataError):
    def __init__(self, row: int, delta: float):
        super().__init__(f"row {row}: timestamp decreased by {delta:.3f} s (> 0.5 s)")
        self.row = row
        self.delta = delta


class BoundaryCountMismatch(DataError):
    def __init__(self, message: str):
        super().__init__(message)


class NoUsableFolds(DataError):
    def __init__(self, subject_id: int):
        super().__init__(f"subject {subject_id}: all folds discarded by the loss rule")
        self.subject_id = subject_id


class DegenerateTrainingSet(DataError):
    def __init__(self, message: str):
        super().__init__(message)


class SingularCovariance(PipelineError):
    def __init__(self, message: str = "pooled covariance is singular; use shrinkage"):
        super().__init__(message)


class DimensionMismatch(PipelineError):
    def __init__(self, message: str):
        super().__init__(message)


class MissingAlgorithm(PipelineError):
    def __init__(self, algorithm: str):
        super().__init__(f"required algorithm missing from results: {algorithm}")
        self.algorithm = algorithm


class AccountingMismatch(PipelineError):
    def __init__(self, message: str):
        super().__init__(message)
