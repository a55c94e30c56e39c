#!/usr/bin/env python3
"""Generate a synthetic fixture corpus plus a split manifest."""

import argparse
import os
import sys

from autous.video_data import build_fixture_corpus, save_manifest, split_train_test


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="corpus directory")
    parser.add_argument("--per-class", type=int, default=40)
    parser.add_argument("--shape", default="8x32x32",
                        help="clip shape TxHxW (default 8x32x32)")
    parser.add_argument("--seed", type=int, default=5)
    parser.add_argument("--train-fraction", type=float, default=0.8)
    parser.add_argument("--split-seed", type=int, default=7)
    args = parser.parse_args()

    shape = tuple(int(d) for d in args.shape.lower().split("x"))
    if len(shape) != 3:
        parser.error(f"--shape must be TxHxW, got {args.shape!r}")

    manifest = build_fixture_corpus(args.out, per_class=args.per_class,
                                    shape=shape, seed=args.seed)
    manifest = split_train_test(manifest, args.train_fraction,
                                seed=args.split_seed)
    manifest_path = os.path.join(args.out, "manifest.tsv")
    save_manifest(manifest, manifest_path)
    print(f"manifest={manifest_path} entries={len(manifest.entries)} "
          f"train={len(manifest.subset('train'))} "
          f"test={len(manifest.subset('test'))}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
