"""Ultrasound video diagnosis toolkit.

Five-class ultrasound video classification with a three-path network,
dataset curation utilities, an LLM-backed report pipeline, report scoring,
and an HTTP service tying the stages together.
"""

from .exceptions import (
    AutoUSError,
    BackendUnavailableError,
    DecodeError,
    MalformedOutputError,
    ShapeError,
    StoreConflictError,
    TrainingDivergedError,
    TransitionError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "AutoUSError",
    "BackendUnavailableError",
    "DecodeError",
    "MalformedOutputError",
    "ShapeError",
    "StoreConflictError",
    "TrainingDivergedError",
    "TransitionError",
    "ValidationError",
    "__version__",
]
