"""Multiclass evaluation: confusion matrix, macro scores, per-class AUC.

AUC is the tie-aware rank statistic P(score+ > score-) + 0.5 P(tie), which is
exact on small test splits.  Classes without both a positive and a negative in
the split get an undefined AUC (``None``) and are excluded from any AUC
average; absent classes contribute 0 to the macro recall/precision means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from scipy.stats import rankdata

from ..ctu_net import CTUNet, Checkpoint, batch_from_samples, model_from_checkpoint
from ..exceptions import ValidationError
from ..video_data import DatasetManifest, load_video


@dataclass
class MetricsReport:
    accuracy: float
    macro_recall: float
    macro_precision: float
    per_class_auc: dict[int, float | None]
    confusion: np.ndarray  # [C, C], rows = true class

    def defined_auc_mean(self) -> float | None:
        defined = [v for v in self.per_class_auc.values() if v is not None]
        return float(np.mean(defined)) if defined else None


def confusion_matrix(labels, predictions, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    predictions = np.asarray(predictions, dtype=int)
    if labels.shape != predictions.shape:
        raise ValidationError("labels and predictions must have equal length")
    if labels.size == 0:
        raise ValidationError("cannot evaluate an empty split")
    for arr, what in ((labels, "label"), (predictions, "prediction")):
        if arr.min() < 0 or arr.max() >= num_classes:
            raise ValidationError(f"{what} id outside [0, {num_classes})")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (labels, predictions), 1)
    return cm


def auc_one_vs_rest(scores, positive_mask) -> float:
    """Mann-Whitney AUC with average ranks for ties."""
    scores = np.asarray(scores, dtype=float)
    positive_mask = np.asarray(positive_mask, dtype=bool)
    n_pos = int(positive_mask.sum())
    n_neg = int((~positive_mask).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValidationError(
            "AUC undefined: need at least one positive and one negative"
        )
    ranks = rankdata(scores)
    rank_sum = ranks[positive_mask].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def metrics_from_scores(labels, probs, num_classes: int) -> MetricsReport:
    """Report from per-sample class probabilities (rows of ``probs``)."""
    labels = np.asarray(labels, dtype=int)
    probs = np.asarray(probs, dtype=float)
    predictions = probs.argmax(axis=1)
    cm = confusion_matrix(labels, predictions, num_classes)

    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    tp = np.diag(cm)
    recalls = np.where(support > 0, tp / np.maximum(support, 1), 0.0)
    precisions = np.where(predicted > 0, tp / np.maximum(predicted, 1), 0.0)

    per_class_auc: dict[int, float | None] = {}
    for k in range(num_classes):
        positives = labels == k
        if positives.any() and (~positives).any():
            per_class_auc[k] = auc_one_vs_rest(probs[:, k], positives)
        else:
            per_class_auc[k] = None

    total = cm.sum()
    return MetricsReport(
        accuracy=float(np.trace(cm) / total),
        macro_recall=float(recalls.mean()),
        macro_precision=float(precisions.mean()),
        per_class_auc=per_class_auc,
        confusion=cm,
    )


def predict_manifest(
    model: CTUNet, manifest: DatasetManifest, split: str, batch_size: int = 8
) -> tuple[np.ndarray, np.ndarray]:
    """Run the classifier over a manifest split; returns (labels, probs)."""
    entries = manifest.subset(split)
    if not entries:
        raise ValidationError(f"split {split!r} is empty")
    t, h, w, _ = model.config.input_shape
    model.eval()
    all_probs = []
    labels = []
    with torch.no_grad():
        for start in range(0, len(entries), batch_size):
            chunk = entries[start : start + batch_size]
            samples = [load_video(e, (h, w), t) for e in chunk]
            frames, batch_labels = batch_from_samples(samples)
            pred = model(frames)
            all_probs.append(pred.probs.numpy())
            labels.extend(batch_labels.tolist())
    return np.asarray(labels), np.concatenate(all_probs, axis=0)


def evaluate(
    model: CTUNet | Checkpoint,
    manifest: DatasetManifest,
    split: str = "test",
    batch_size: int = 8,
) -> MetricsReport:
    if isinstance(model, Checkpoint):
        model = model_from_checkpoint(model)
    labels, probs = predict_manifest(model, manifest, split, batch_size)
    return metrics_from_scores(labels, probs, model.config.num_classes)
