"""UAR-centric evaluation: confusion matrices, per-class recall, total
accuracy, and report emission (metrics.json / confusion.csv / summary.txt).
"""

from __future__ import annotations

import csv
import json
import os
import warnings
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .errors import StutterKitError
from .labels import N_CLASSES, ClassLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[r][p]: reference class r predicted as p."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (N_CLASSES, N_CLASSES) or (counts < 0).any():
            raise ValueError("confusion matrix must be 8x8 with non-negative counts")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricsReport:
    per_class_recall: tuple  # None for classes absent from the reference
    uar: float
    total_accuracy: float
    n: int
    excluded_classes: tuple


def confusion(ref, pred) -> ConfusionMatrix:
    ref = [int(r) for r in ref]
    pred = [int(p) for p in pred]
    if len(ref) != len(pred):
        raise StutterKitError(f"length mismatch: {len(ref)} references vs {len(pred)} predictions")
    if not ref:
        raise StutterKitError("need at least one scored sample")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for r, p in zip(ref, pred):
        counts[r][p] += 1
    return ConfusionMatrix(counts)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Per-class recall, UAR, and total accuracy.

    Classes with empty reference support have undefined recall; they are
    excluded from the UAR mean and reported with a warning.
    """
    if cm.n == 0:
        raise StutterKitError("empty confusion matrix")
    row_sums = cm.counts.sum(axis=1)
    recalls = []
    excluded = []
    for c in range(N_CLASSES):
        if row_sums[c] == 0:
            recalls.append(None)
            excluded.append(ClassLabel(c).name)
        else:
            recalls.append(float(cm.counts[c, c] / row_sums[c]))
    if excluded:
        warnings.warn(f"classes with no reference samples excluded from UAR: {excluded}")
    present = [r for r in recalls if r is not None]
    return MetricsReport(
        per_class_recall=tuple(recalls),
        uar=float(np.mean(present)),
        total_accuracy=float(np.trace(cm.counts) / cm.n),
        n=cm.n,
        excluded_classes=tuple(excluded),
    )


def uar_from_recalls(recalls) -> float:
    """Mean of per-class recalls (fractions in [0, 1])."""
    return float(np.mean(np.asarray(recalls, dtype=np.float64)))


def percent(value: float, decimals: int = 1) -> str:
    """Half-up percentage formatting used in text reports."""
    q = Decimal(1).scaleb(-decimals)
    return str(Decimal(value * 100).quantize(q, rounding=ROUND_HALF_UP))


def report_dict(report: MetricsReport) -> dict:
    return {
        "per_class_recall": {
            ClassLabel(c).name: report.per_class_recall[c] for c in range(N_CLASSES)
        },
        "uar": report.uar,
        "total_accuracy": report.total_accuracy,
        "n": report.n,
        "excluded_classes": list(report.excluded_classes),
    }


def summary_line(report: MetricsReport) -> str:
    cells = [
        f"{ClassLabel(c).name} {percent(r)}" if r is not None else f"{ClassLabel(c).name} n/a"
        for c, r in enumerate(report.per_class_recall)
    ]
    return (
        " ".join(cells)
        + f" TA {percent(report.total_accuracy)} UAR {percent(report.uar)}"
    )


def emit_report(report: MetricsReport, cm: ConfusionMatrix, path_prefix: str) -> dict:
    """Write metrics.json (full precision), confusion.csv (labeled 9x9),
    and summary.txt; returns the written paths."""
    os.makedirs(path_prefix, exist_ok=True)
    paths = {
        "metrics": os.path.join(path_prefix, "metrics.json"),
        "confusion": os.path.join(path_prefix, "confusion.csv"),
        "summary": os.path.join(path_prefix, "summary.txt"),
    }
    with open(paths["metrics"], "w", encoding="utf-8") as fh:
        json.dump(report_dict(report), fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(paths["confusion"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        names = [ClassLabel(c).name for c in range(N_CLASSES)]
        writer.writerow(["ref\\pred"] + names)
        for c in range(N_CLASSES):
            writer.writerow([names[c]] + cm.counts[c].tolist())
    with open(paths["summary"], "w", encoding="utf-8") as fh:
        fh.write(summary_line(report) + "\n")
    return paths


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
