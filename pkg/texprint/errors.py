"""
Exception hierarchy for texprint.

Every error raised on purpose by the library derives from TexprintError so the
CLI can map it to an exit status without catching unrelated failures.
"""


class TexprintError(Exception):
    """Base class for all texprint errors."""


class ImageError(TexprintError):
    """Missing, unreadable, colour or otherwise unusable image input."""


class OrientationError(TexprintError):
    pass


class DiffusionError(TexprintError):
    pass


class TextureError(TexprintError):
    pass


class DatasetError(TexprintError):
    """Problems with the corpus directory or the feature table."""


class EmptyDatasetError(DatasetError):
    """Raised when extraction produced no instances at all."""

    def __init__(self, message: str, failures: list[dict] | None = None):
        super().__init__(message)
        self.failures = failures or []


class LearnerError(TexprintError):
    pass


class ModelFormatError(LearnerError):
    """Serialized model is corrupt or written by an incompatible version."""


class EvaluationError(TexprintError):
    pass


class ConfigError(TexprintError):
    pass
