#!/usr/bin/env python3
"""Train all four path-removal variants and emit comparison reports."""

import argparse
import os
import sys

from autous.ctu_net import ModelConfig
from autous.train_eval import TrainSpec, run_ablations
from autous.train_eval.reporting import emit_ablation_report, plot_radar
from autous.video_data import load_manifest


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out", default="ablation_report")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--lr", type=float, default=5e-3)
    parser.add_argument("--batch-size", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--model-seed", type=int, default=1)
    args = parser.parse_args()

    manifest = load_manifest(args.manifest)
    spec = TrainSpec(batch_size=args.batch_size, learning_rate=args.lr,
                     epochs=args.epochs, seed=args.seed)
    table = run_ablations(manifest, ModelConfig.tiny(seed=args.model_seed), spec)
    paths = emit_ablation_report(table, args.out, manifest.class_names)
    plot_radar(paths["radar"], os.path.join(args.out, "radar.png"))

    for outcome in table.rows():
        if outcome.metrics is None:
            print(f"{outcome.variant}: FAILED ({outcome.error})")
        else:
            print(f"{outcome.variant}: accuracy={outcome.metrics.accuracy:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
