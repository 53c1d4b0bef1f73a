"""Synthetic dataset generator.

The real corpus is access-restricted, so every end-to-end run and test in
this repository works on generated data: 13-stream embedding bundles with
class signal injected into a chosen subset of streams, or simple tone/noise
WAV files.  Generation is fully determined by the seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .audio import TARGET_RATE, Waveform, write_wav
from .embio import EmbeddingBundle, EmbeddingSequence, N_W2V2_STREAMS, write_bundle
from .labels import ClassLabel, DatasetManifest, UtteranceRecord, save_manifest

SPLIT_FRACTIONS = (("train", 0.6), ("validation", 0.2), ("test", 0.2))


@dataclass(frozen=True)
class SynthSpec:
    n_per_class: int = 50
    dim: int = 24
    n_frames: int = 25
    separation: float = 10.0
    seed: int = 0
    mode: str = "bundle"  # bundle | wav
    signal_layers: tuple = (3,)
    n_layers: int = N_W2V2_STREAMS
    frame_jitter: float = 0.5

    def __post_init__(self):
        if self.separation < 0:
            raise ValueError("separation must be >= 0")
        if self.mode not in ("bundle", "wav"):
            raise ValueError(f"bad mode {self.mode!r}")


def _class_means(spec: SynthSpec, rng) -> np.ndarray:
    means = np.zeros((len(ClassLabel), spec.dim))
    for c in range(len(ClassLabel)):
        direction = rng.normal(size=spec.dim)
        direction /= np.linalg.norm(direction)
        means[c] = spec.separation * direction
    return means


def _splits(n: int):
    n_train = int(round(n * 0.6))
    n_val = int(round(n * 0.2))
    for i in range(n):
        if i < n_train:
            yield "train"
        elif i < n_train + n_val:
            yield "validation"
        else:
            yield "test"


def synth_data(spec: SynthSpec, out_dir: str) -> str:
    """Generate files plus a manifest.csv; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    means = _class_means(spec, rng)
    records = []
    for label in ClassLabel:
        for i, split in zip(range(spec.n_per_class), _splits(spec.n_per_class)):
            utt_id = f"{label.name.lower()}_{i:03d}"
            if spec.mode == "bundle":
                path = os.path.join(out_dir, utt_id + ".emb1")
                write_bundle(_make_bundle(spec, means[label], rng), path)
                rec = UtteranceRecord(utt_id, None, path, label, split)
            else:
                path = os.path.join(out_dir, utt_id + ".wav")
                write_wav(path, _make_wav(spec, int(label), rng))
                rec = UtteranceRecord(utt_id, path, None, label, split)
            records.append(rec)
    manifest_path = os.path.join(out_dir, "manifest.csv")
    save_manifest(DatasetManifest(records=tuple(records)), manifest_path)
    return manifest_path


def _make_bundle(spec: SynthSpec, mean: np.ndarray, rng) -> EmbeddingBundle:
    base = mean + rng.normal(size=spec.dim)  # unit-variance utterance noise
    layers = []
    for k in range(spec.n_layers):
        if k in spec.signal_layers:
            frames = base[:, None] + spec.frame_jitter * rng.normal(
                size=(spec.dim, spec.n_frames)
            )
        else:
            frames = rng.normal(size=(spec.dim, spec.n_frames))
        layers.append(EmbeddingSequence(frames))
    return EmbeddingBundle(layers=tuple(layers))


def _make_wav(spec: SynthSpec, class_id: int, rng) -> Waveform:
    """Per-class tone frequency plus noise; louder noise as separation drops."""
    duration = 0.5
    t = np.arange(int(duration * TARGET_RATE)) / TARGET_RATE
    freq = 220.0 * (1.0 + 0.4 * class_id)
    tone_gain = spec.separation / (1.0 + spec.separation) if spec.separation > 0 else 0.0
    samples = 0.3 * tone_gain * np.sin(2 * np.pi * freq * t)
    samples += 0.1 * rng.normal(size=len(t))
    return Waveform(samples=np.clip(samples, -1.0, 1.0), sample_rate=TARGET_RATE)
