#!/usr/bin/env python3
"""Per-stream classifier sweep on an embedding manifest.

Scores every requested embedding stream (pooled mean||std vectors) with
the classic classifiers and writes sweep.csv; useful for finding which
stream carries the most class-discriminative signal.

Usage:
    python3 scripts/run_layer_sweep.py --manifest data/manifest.csv --out runs/sweep
If --manifest is omitted, a synthetic dataset (signal in stream 3) is
generated first.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from stutterkit.evalreport import percent
from stutterkit.labels import load_manifest
from stutterkit.sweep import argmax_layer, layer_sweep, write_sweep_csv
from stutterkit.synth import SynthSpec, synth_data


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--manifest", default=None)
    parser.add_argument("--out", default="runs/sweep")
    parser.add_argument("--layers", type=int, nargs="*", default=list(range(13)))
    parser.add_argument("--classifiers", default="svm,knn,gnb")
    parser.add_argument("--with-mfcc", action="store_true")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    manifest_path = args.manifest
    if manifest_path is None:
        manifest_path = synth_data(
            SynthSpec(n_per_class=50, dim=16, n_frames=22, separation=10.0,
                      seed=args.seed),
            os.path.join(args.out, "data"),
        )
        print(f"synthetic dataset: {manifest_path}")

    manifest = load_manifest(manifest_path)
    classifiers = [c.strip() for c in args.classifiers.split(",") if c.strip()]
    rows = layer_sweep(
        manifest, args.layers, classifiers,
        include_mfcc_concat=args.with_mfcc, seed=args.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sweep.csv")
    write_sweep_csv(rows, path)
    for row in rows:
        print(f"layer {row.layer:>4} {row.variant:<12} {row.classifier:<4} "
              f"UAR {percent(row.uar)}")
    for clf in classifiers:
        print(f"best layer for {clf}: {argmax_layer(rows, clf)}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
