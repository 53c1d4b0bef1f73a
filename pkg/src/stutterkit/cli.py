"""Command-line surface.

Subcommands: extract-mfcc, pool, combine, train, predict, evaluate,
layer-sweep, synth-data, inspect-bundle.  Exit codes: 0 success, 1 usage
error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import audio, embio
from .config import RunConfig, load_config
from .errors import ConfigError, StutterKitError
from .evalreport import percent
from .features import parse_feature_spec, pooled_feature, sequence_feature
from .labels import load_manifest, save_manifest, DatasetManifest, UtteranceRecord
from .runner import run_evaluate, run_predict, run_train, write_run_manifest
from .sweep import layer_sweep, write_sweep_csv
from .synth import SynthSpec, synth_data

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def build_parser():
    parser = _Parser(prog="stutterkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-data", parents=[], help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n-per-class", type=int, default=50)
    p.add_argument("--dim", type=int, default=24)
    p.add_argument("--frames", type=int, default=25)
    p.add_argument("--separation", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["bundle", "wav"], default="bundle")
    p.add_argument("--signal-layers", default="3",
                   help="comma-separated bundle streams carrying the class signal")

    p = sub.add_parser("extract-mfcc", help="materialize MFCC bundles for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--check-files", action="store_true")

    p = sub.add_parser("pool", help="emit pooled vectors as CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--feature", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", default=None)

    p = sub.add_parser("combine", help="materialize combined sequences as 1-layer bundles")
    p.add_argument("--manifest", required=True)
    p.add_argument("--feature", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a model per run config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("predict", help="predict a split with a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="validation")
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score predictions against references")
    p.add_argument("--ref", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("layer-sweep", help="UAR per embedding stream and classifier")
    p.add_argument("--manifest", required=True)
    p.add_argument("--layers", default="0-12")
    p.add_argument("--classifiers", default="svm,knn,gnb")
    p.add_argument("--with-mfcc", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("inspect-bundle", help="print EMB1 header fields")
    p.add_argument("path")
    return parser


def _parse_layer_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _cmd_synth_data(args):
    spec = SynthSpec(
        n_per_class=args.n_per_class,
        dim=args.dim,
        n_frames=args.frames,
        separation=args.separation,
        seed=args.seed,
        mode=args.mode,
        signal_layers=tuple(_parse_layer_list(args.signal_layers)),
    )
    path = synth_data(spec, args.out)
    print(f"wrote {path}")


def _cmd_extract_mfcc(args):
    manifest = load_manifest(args.manifest, check_files=args.check_files)
    os.makedirs(args.out, exist_ok=True)
    records = []
    for rec in manifest.records:
        seq = sequence_feature(rec, "mfcc")
        path = os.path.join(args.out, rec.id + ".emb1")
        embio.write_bundle(embio.EmbeddingBundle(layers=(seq,)), path)
        records.append(
            UtteranceRecord(rec.id, rec.audio_path, path, rec.label, rec.split)
        )
    out_manifest = os.path.join(args.out, "manifest.csv")
    save_manifest(DatasetManifest(records=tuple(records)), out_manifest)
    print(f"wrote {len(records)} bundles and {out_manifest}")


def _cmd_pool(args):
    parse_feature_spec(args.feature)
    manifest = load_manifest(args.manifest)
    records = manifest.split(args.split) if args.split else list(manifest.records)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for rec in records:
            values = pooled_feature(rec, args.feature)
            writer.writerow([rec.id] + [repr(v) for v in values])
    print(f"wrote {args.out} ({len(records)} rows)")


def _cmd_combine(args):
    parse_feature_spec(args.feature)
    manifest = load_manifest(args.manifest)
    os.makedirs(args.out, exist_ok=True)
    records = []
    for rec in manifest.records:
        seq = sequence_feature(rec, args.feature)
        path = os.path.join(args.out, rec.id + ".emb1")
        embio.write_bundle(embio.EmbeddingBundle(layers=(seq,)), path)
        records.append(UtteranceRecord(rec.id, rec.audio_path, path, rec.label, rec.split))
    out_manifest = os.path.join(args.out, "manifest.csv")
    save_manifest(DatasetManifest(records=tuple(records)), out_manifest)
    print(f"wrote {len(records)} bundles and {out_manifest}")


def _cmd_train(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    result = run_train(cfg)
    print(result["summary"])
    print(f"artifacts in {result['out']}")


def _cmd_predict(args):
    run_predict(args.checkpoint, args.manifest, args.split, args.out)
    print(f"wrote {args.out}")


def _cmd_evaluate(args):
    report, _ = run_evaluate(args.ref, args.pred, args.out)
    print(f"UAR {percent(report.uar)}")


def _cmd_layer_sweep(args):
    manifest = load_manifest(args.manifest)
    layers = _parse_layer_list(args.layers)
    classifiers = [c.strip() for c in args.classifiers.split(",") if c.strip()]
    rows = layer_sweep(
        manifest, layers, classifiers, include_mfcc_concat=args.with_mfcc, seed=args.seed
    )
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sweep.csv")
    write_sweep_csv(rows, path)
    for row in rows:
        print(f"layer {row.layer} {row.variant} {row.classifier} UAR {percent(row.uar)}")
    print(f"wrote {path}")


def _cmd_inspect_bundle(args):
    bundle = embio.read_bundle(args.path)
    size = os.path.getsize(args.path)
    print(f"n_layers={bundle.n_layers} dim={bundle.dim} T={bundle.T} bytes={size}")


COMMANDS = {
    "synth-data": _cmd_synth_data,
    "extract-mfcc": _cmd_extract_mfcc,
    "pool": _cmd_pool,
    "combine": _cmd_combine,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "layer-sweep": _cmd_layer_sweep,
    "inspect-bundle": _cmd_inspect_bundle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except (StutterKitError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
