"""Label taxonomy, utterance records, and dataset manifests.

The task is 8-way: seven disfluency categories plus the fluent class
(NoDisfluency).  The fluent/disfluent dichotomy used by the two-branch
models is derived from the label, never stored.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import (
    DuplicateId,
    EmptySplit,
    MissingFile,
    UnknownLabel,
    ZeroClassCount,
)

N_CLASSES = 8
N_DISFLUENT = 7

SPLITS = ("train", "validation", "test")

MANIFEST_HEADER = ["id", "audio_path", "embedding_path", "label", "split"]


class ClassLabel(IntEnum):
    """The 8 segment categories; ids are fixed, NoDisfluency is last."""

    Garbage = 0
    Fillers = 1
    Prolongation = 2
    SoundRepetition = 3
    Block = 4
    Modified = 5
    WordRepetition = 6
    NoDisfluency = 7

    @classmethod
    def parse(cls, name: str) -> "ClassLabel":
        """Parse a label name, case-insensitively."""
        key = name.strip().lower()
        try:
            return _NAME_LOOKUP[key]
        except KeyError:
            raise UnknownLabel(name) from None


_NAME_LOOKUP = {lab.name.lower(): lab for lab in ClassLabel}


def is_fluent(label: ClassLabel) -> bool:
    return label == ClassLabel.NoDisfluency


def disfluent_index(label: ClassLabel) -> int:
    """7-way target used by the disfluent branch; undefined for fluent."""
    if is_fluent(label):
        raise ValueError("fluent sample has no disfluent sub-category")
    return int(label)


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    audio_path: str | None
    embedding_path: str | None
    label: ClassLabel
    split: str

    def __post_init__(self):
        if not (self.audio_path or self.embedding_path):
            raise ValueError(f"record {self.id!r}: need audio_path or embedding_path")
        if self.split not in SPLITS:
            raise ValueError(f"record {self.id!r}: bad split {self.split!r}")


@dataclass(frozen=True)
class DatasetManifest:
    """Immutable collection of utterance records; safe to share read-only."""

    records: tuple[UtteranceRecord, ...]

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise DuplicateId(rec.id)
            seen.add(rec.id)

    def split(self, split: str) -> list[UtteranceRecord]:
        return [r for r in self.records if r.split == split]

    def class_counts(self, split: str) -> dict[ClassLabel, int]:
        counts = {lab: 0 for lab in ClassLabel}
        for rec in self.split(split):
            counts[rec.label] += 1
        return counts

    def require_split(self, split: str) -> list[UtteranceRecord]:
        recs = self.split(split)
        if not recs:
            raise EmptySplit(split)
        return recs


def load_manifest(path: str, check_files: bool = False) -> DatasetManifest:
    """Load and validate a CSV manifest.

    Expected header: ``id,audio_path,embedding_path,label,split``.
    Empty path cells become None.  With check_files=True every referenced
    file must exist.
    """
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in MANIFEST_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"manifest {path}: missing columns {missing}")
        base = os.path.dirname(os.path.abspath(path))
        for row in reader:
            audio = _resolve(row["audio_path"], base)
            emb = _resolve(row["embedding_path"], base)
            rec = UtteranceRecord(
                id=row["id"],
                audio_path=audio,
                embedding_path=emb,
                label=ClassLabel.parse(row["label"]),
                split=row["split"].strip().lower(),
            )
            if check_files:
                for p in (rec.audio_path, rec.embedding_path):
                    if p and not os.path.exists(p):
                        raise MissingFile(f"record {rec.id!r}: {p} does not exist")
            records.append(rec)
    return DatasetManifest(records=tuple(records))


def _resolve(cell: str | None, base: str) -> str | None:
    cell = (cell or "").strip()
    if not cell:
        return None
    return cell if os.path.isabs(cell) else os.path.join(base, cell)


def save_manifest(manifest: DatasetManifest, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for rec in manifest.records:
            writer.writerow(
                [rec.id, rec.audio_path or "", rec.embedding_path or "", rec.label.name, rec.split]
            )


def weights_from_counts(counts) -> np.ndarray:
    """Per-class weights N / (C * N_i) from raw per-class counts."""
    counts = np.asarray(counts, dtype=np.float64)
    if np.any(counts <= 0):
        bad = int(np.argmin(counts))
        raise ZeroClassCount(bad)
    total = counts.sum()
    return total / (len(counts) * counts)


def class_weights(manifest: DatasetManifest, split: str = "train") -> np.ndarray:
    """Imbalance weights for the 8 classes computed on one split.

    The weighted mean of the weights under the class frequencies is 1 by
    construction.  Raises ZeroClassCount if any class is absent.
    """
    manifest.require_split(split)
    counts = manifest.class_counts(split)
    try:
        return weights_from_counts([counts[lab] for lab in ClassLabel])
    except ZeroClassCount as err:
        raise ZeroClassCount(ClassLabel(err.label)) from None
