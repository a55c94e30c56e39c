from .checkpoint import (
    FORMAT_VERSION,
    Checkpoint,
    checkpoint_from_model,
    load_model,
    model_from_checkpoint,
    read_checkpoint,
    save_checkpoint,
    write_checkpoint,
)
from .config import ABLATIONS, FastPathConfig, FreqPathConfig, ModelConfig, SlowPathConfig
from .gradcheck import GradCheckResult, gradient_check
from .model import (
    CTUNet,
    PathFeatures,
    Prediction,
    batch_from_samples,
    build_model,
    count_parameters,
    fuse,
    init_parameters,
)
from .paths import (
    LAPLACIAN_KERNEL,
    FastPath,
    FrequencyPath,
    SlowPath,
    attention,
    laplacian_highpass,
    multi_head_attention,
)

__all__ = [
    "ABLATIONS",
    "FORMAT_VERSION",
    "LAPLACIAN_KERNEL",
    "CTUNet",
    "Checkpoint",
    "FastPath",
    "FastPathConfig",
    "FreqPathConfig",
    "FrequencyPath",
    "GradCheckResult",
    "ModelConfig",
    "PathFeatures",
    "Prediction",
    "SlowPath",
    "SlowPathConfig",
    "attention",
    "batch_from_samples",
    "build_model",
    "checkpoint_from_model",
    "count_parameters",
    "fuse",
    "gradient_check",
    "init_parameters",
    "laplacian_highpass",
    "load_model",
    "model_from_checkpoint",
    "multi_head_attention",
    "read_checkpoint",
    "save_checkpoint",
    "write_checkpoint",
]
