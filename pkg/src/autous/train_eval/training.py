"""Desk-scale training loop: minibatch Adam on cross-entropy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from ..ctu_net import (
    Checkpoint,
    CTUNet,
    ModelConfig,
    batch_from_samples,
    build_model,
    checkpoint_from_model,
)
from ..exceptions import TrainingDivergedError, ValidationError
from ..video_data import DatasetManifest, load_video


@dataclass
class TrainSpec:
    optimizer: str = "adam"
    beta1: float = 0.9
    weight_decay: float = 1e-4
    batch_size: int = 4
    learning_rate: float = 1e-4
    epochs: int = 10
    input_size: tuple[int, int] | None = None  # None -> model config (H, W)
    seed: int = 0

    def __post_init__(self):
        if self.optimizer != "adam":
            raise ValidationError(f"unsupported optimizer {self.optimizer!r}")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValidationError("learning_rate must be >= 0")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")


@dataclass
class TrainResult:
    model: CTUNet
    checkpoint: Checkpoint
    loss_curve: list[tuple[int, float]] = field(default_factory=list)
    seed: int = 0


def _load_train_set(manifest: DatasetManifest, config: ModelConfig, spec: TrainSpec):
    t, h, w, _ = config.input_shape
    if spec.input_size is not None and tuple(spec.input_size) != (h, w):
        raise ValidationError(
            f"spec input_size {spec.input_size} conflicts with model "
            f"input_shape {(h, w)}"
        )
    train_entries = manifest.subset("train")
    if not train_entries:
        raise ValidationError("manifest has no train entries")
    present = {e.class_id for e in manifest.entries}
    trained = {e.class_id for e in train_entries}
    missing = sorted(present - trained)
    if missing:
        names = ", ".join(manifest.class_names[c] for c in missing)
        raise ValidationError(f"no train entries for class(es): {names}")
    return [load_video(e, (h, w), t) for e in train_entries]


def train(
    model_config: ModelConfig, manifest: DatasetManifest, spec: TrainSpec
) -> TrainResult:
    """Train from scratch; deterministic for a fixed seed on one platform."""
    samples = _load_train_set(manifest, model_config, spec)
    frames, labels = batch_from_samples(samples)

    torch.manual_seed(spec.seed)  # dropout draws
    model = build_model(model_config)
    model.train()
    optimizer = torch.optim.Adam(
        model.parameters(),
        lr=spec.learning_rate,
        betas=(spec.beta1, 0.999),
        weight_decay=spec.weight_decay,
    )

    rng = np.random.default_rng(spec.seed)
    loss_curve: list[tuple[int, float]] = []
    step = 0
    n = frames.shape[0]
    for _epoch in range(spec.epochs):
        order = rng.permutation(n)
        for start in range(0, n, spec.batch_size):
            idx = order[start : start + spec.batch_size]
            batch = frames[idx]
            target = labels[idx]
            pred = model(batch)
            loss = F.cross_entropy(pred.logits, target)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDivergedError(
                    f"loss became non-finite at step {step}",
                    snapshot={
                        "step": step,
                        "loss": value,
                        "recent_losses": [v for _, v in loss_curve[-10:]],
                        "learning_rate": spec.learning_rate,
                    },
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            loss_curve.append((step, value))
            step += 1

    model.eval()
    return TrainResult(
        model=model,
        checkpoint=checkpoint_from_model(model),
        loss_curve=loss_curve,
        seed=spec.seed,
    )
