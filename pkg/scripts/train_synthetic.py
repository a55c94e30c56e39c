#!/usr/bin/env python3
"""Train the tiny classifier on a synthetic corpus and report test metrics."""

import argparse
import sys

from autous.ctu_net import ModelConfig
from autous.ctu_net.checkpoint import write_checkpoint
from autous.train_eval import TrainSpec, evaluate, train
from autous.train_eval.reporting import write_loss_curve
from autous.video_data import load_manifest


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--manifest", required=True,
                        help="manifest from make_fixtures.py")
    parser.add_argument("--out", default="tiny.ckpt")
    parser.add_argument("--loss-curve", default="")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--lr", type=float, default=5e-3)
    parser.add_argument("--batch-size", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--model-seed", type=int, default=1)
    args = parser.parse_args()

    manifest = load_manifest(args.manifest)
    spec = TrainSpec(batch_size=args.batch_size, learning_rate=args.lr,
                     epochs=args.epochs, seed=args.seed)
    result = train(ModelConfig.tiny(seed=args.model_seed), manifest, spec)
    write_checkpoint(result.checkpoint, args.out)
    if args.loss_curve:
        write_loss_curve(result.loss_curve, args.loss_curve)

    report = evaluate(result.model, manifest, split="test")
    print(f"checkpoint={args.out} accuracy={report.accuracy:.4f} "
          f"recall={report.macro_recall:.4f} "
          f"precision={report.macro_precision:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
