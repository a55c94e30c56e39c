"""Path-removal sweep: train the four variants under one protocol."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ..ctu_net import ABLATIONS, ModelConfig
from ..video_data import DatasetManifest
from .metrics import MetricsReport, evaluate
from .training import TrainResult, TrainSpec, train


@dataclass
class VariantOutcome:
    variant: str
    metrics: MetricsReport | None
    error: str | None
    seed: int
    spec: TrainSpec


@dataclass
class AblationTable:
    outcomes: dict[str, VariantOutcome]

    def rows(self):
        return [self.outcomes[v] for v in ABLATIONS if v in self.outcomes]


def run_ablations(
    manifest: DatasetManifest,
    base_config: ModelConfig,
    spec: TrainSpec,
    eval_split: str = "test",
    keep_models: dict[str, TrainResult] | None = None,
) -> AblationTable:
    """Train full/no_slow/no_fast/no_freq with identical seed, spec and split.

    Per-variant failures are captured rather than aborting the sweep.
    """
    outcomes: dict[str, VariantOutcome] = {}
    for variant in ABLATIONS:
        config = dataclasses.replace(base_config, ablation=variant)
        try:
            result = train(config, manifest, spec)
            if keep_models is not None:
                keep_models[variant] = result
            metrics = evaluate(result.model, manifest, split=eval_split)
            outcomes[variant] = VariantOutcome(
                variant=variant, metrics=metrics, error=None, seed=spec.seed, spec=spec
            )
        except Exception as exc:  # keep sweeping; report per variant
            outcomes[variant] = VariantOutcome(
                variant=variant, metrics=None, error=str(exc), seed=spec.seed, spec=spec
            )
    return AblationTable(outcomes=outcomes)
