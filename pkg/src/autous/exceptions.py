"""Shared exception hierarchy."""


class AutoUSError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(AutoUSError):
    """Bad user input or configuration."""


class DecodeError(AutoUSError):
    """Media file could not be decoded."""


class ShapeError(AutoUSError):
    """Array shape does not match the declared contract."""


class TrainingDivergedError(AutoUSError):
    """Loss became non-finite during training."""

    def __init__(self, message, snapshot=None):
        super().__init__(message)
        self.snapshot = snapshot or {}


class BackendUnavailableError(AutoUSError):
    """LLM backend could not be reached within the retry budget."""


class MalformedOutputError(AutoUSError):
    """LLM response did not contain the expected report sections."""

    def __init__(self, message, raw_text=""):
        super().__init__(message)
        self.raw_text = raw_text


class StoreConflictError(AutoUSError):
    """Conditional store update lost a revision race."""


class TransitionError(AutoUSError):
    """Case status machine forbids the requested step."""
