from .ablation import AblationTable, VariantOutcome, run_ablations
from .metrics import (
    MetricsReport,
    auc_one_vs_rest,
    confusion_matrix,
    evaluate,
    metrics_from_scores,
    predict_manifest,
)
from .reporting import (
    emit_ablation_report,
    emit_report,
    format_percent,
    plot_radar,
    write_loss_curve,
)
from .training import TrainResult, TrainSpec, train

__all__ = [
    "AblationTable",
    "MetricsReport",
    "TrainResult",
    "TrainSpec",
    "VariantOutcome",
    "auc_one_vs_rest",
    "confusion_matrix",
    "emit_ablation_report",
    "emit_report",
    "evaluate",
    "format_percent",
    "metrics_from_scores",
    "plot_radar",
    "predict_manifest",
    "run_ablations",
    "train",
    "write_loss_curve",
]
