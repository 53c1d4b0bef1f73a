"""Layer sweep: fit classic classifiers on pooled features from each
requested embedding stream (optionally also MFCC-concatenated) and report
validation UAR per (layer, variant, classifier)."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .classic import GnbModel, KnnModel, LinearSvmModel
from .evalreport import confusion, metrics
from .features import pooled_feature
from .labels import DatasetManifest

CLASSIC_BUILDERS = {
    "svm": lambda seed: LinearSvmModel(seed=seed),
    "knn": lambda seed: KnnModel(),
    "gnb": lambda seed: GnbModel(),
}


@dataclass(frozen=True)
class SweepRow:
    layer: int
    variant: str  # "layer" or "mfcc:layer"
    classifier: str
    uar: float


def _pooled_split(manifest, split, spec):
    records = manifest.require_split(split)
    x = np.stack([pooled_feature(rec, spec) for rec in records])
    y = np.array([int(rec.label) for rec in records])
    return x, y


def layer_sweep(manifest: DatasetManifest, layers, classifiers,
                include_mfcc_concat=False, seed=0) -> list[SweepRow]:
    for name in classifiers:
        if name not in CLASSIC_BUILDERS:
            raise ValueError(f"unknown classifier {name!r}")
    rows = []
    for layer in layers:
        variants = [("layer", f"layer:{layer}")]
        if include_mfcc_concat:
            variants.append(("mfcc:layer", f"mfcc:layer:{layer}"))
        for variant, spec in variants:
            x_train, y_train = _pooled_split(manifest, "train", spec)
            x_val, y_val = _pooled_split(manifest, "validation", spec)
            for name in classifiers:
                model = CLASSIC_BUILDERS[name](seed).fit(x_train, y_train)
                pred = model.predict(x_val)
                rows.append(
                    SweepRow(layer, variant, name, metrics(confusion(y_val, pred)).uar)
                )
    return rows


def write_sweep_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layer", "variant", "classifier", "uar"])
        for row in rows:
            writer.writerow([row.layer, row.variant, row.classifier, repr(row.uar)])


def argmax_layer(rows, classifier, variant="layer") -> int:
    """Layer with the highest UAR for one classifier/variant."""
    candidates = [r for r in rows if r.classifier == classifier and r.variant == variant]
    if not candidates:
        raise ValueError(f"no sweep rows for classifier {classifier!r}")
    return max(candidates, key=lambda r: r.uar).layer
