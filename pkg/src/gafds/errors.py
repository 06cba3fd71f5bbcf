"""Exception types shared across the package."""


class GafdsError(Exception):
    """Base class for package-specific errors."""


class DataFormatError(GafdsError, ValueError):
    """An input file, directory, or serialized artifact cannot be parsed."""


class InvalidIntervalError(GafdsError, ValueError):
    """A frequency interval does not map to a usable bin range."""


class DegenerateSeriesError(GafdsError, ValueError):
    """A series lacks the structure an estimator needs (e.g. zero variance)."""


class InsufficientDataError(GafdsError, ValueError):
    """An operation needs more samples, records, or matches than provided."""


class NotFittedError(GafdsError, RuntimeError):
    """predict/transform called before fit."""


class ConfigError(GafdsError, ValueError):
    """An experiment configuration is malformed or inconsistent."""


class StageError(GafdsError, RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: str):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
