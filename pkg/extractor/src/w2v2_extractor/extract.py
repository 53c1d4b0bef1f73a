"""Per-utterance hidden-state extraction from the Wav2Vec2 base model.

For every manifest row this writes a 13-stream EMB1 bundle: stream 0 is
the feature-projection output (the 768-dim stream feeding the encoder),
streams 1..12 are the contextual transformer layer outputs.  The model is
used purely as a frozen feature extractor (eval mode, no gradient, no CTC
head), so repeated extraction is bit-identical.

EMB1 layout (little-endian): magic ``EMB1``, u32 n_layers, u32 dim,
u32 T, then n_layers * T * dim float32 values in [layer][frame][dim]
order.  This mirrors the consumer's on-disk format byte for byte; the
two packages share only this file format, the manifest CSV schema, and
command lines.
"""

from __future__ import annotations

import csv
import os
import struct
import sys
import tempfile
from dataclasses import dataclass

import numpy as np
import torch
from scipy.io import wavfile

MAGIC = b"EMB1"
HEADER = struct.Struct("<4sIII")

EXPECTED_DIM = 768
EXPECTED_CONTEXT_LAYERS = 12

MANIFEST_FIELDS = ["id", "audio_path", "embedding_path", "label", "split"]


class ExtractorError(Exception):
    pass


@dataclass
class ExtractorConfig:
    manifest: str
    out_dir: str
    model_id: str = "facebook/wav2vec2-base"
    device: str = "cpu"
    batch_size: int = 1
    random_init: bool = False  # seeded untrained weights, for offline smoke runs
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ExtractorError("batch size must be >= 1")


def check_model_shape(config) -> None:
    """Abort unless the loaded model matches the 768-dim / 12-layer base."""
    if config.hidden_size != EXPECTED_DIM:
        raise ExtractorError(
            f"model hidden size {config.hidden_size} != {EXPECTED_DIM}; "
            "only the base model is supported"
        )
    if config.num_hidden_layers != EXPECTED_CONTEXT_LAYERS:
        raise ExtractorError(
            f"model has {config.num_hidden_layers} context layers, "
            f"expected {EXPECTED_CONTEXT_LAYERS}"
        )


def load_model(cfg: ExtractorConfig):
    from transformers import Wav2Vec2Config, Wav2Vec2Model

    if cfg.random_init:
        torch.manual_seed(cfg.seed)
        model = Wav2Vec2Model(Wav2Vec2Config())
    else:
        model = Wav2Vec2Model.from_pretrained(cfg.model_id)
    check_model_shape(model.config)
    model.to(cfg.device)
    model.eval()
    return model


def expected_frames(model, n_samples: int) -> int:
    """Encoder output length for a waveform of n_samples (20 ms stride)."""
    return int(model._get_feat_extract_output_lengths(n_samples))


def read_wav_16k_mono(path: str) -> np.ndarray:
    rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise ExtractorError(f"{path}: expected mono audio, got {data.ndim} channels")
    if rate != 16000:
        raise ExtractorError(f"{path}: expected 16 kHz audio, got {rate} Hz")
    if data.dtype == np.int16:
        return data.astype(np.float32) / 32768.0
    if data.dtype in (np.float32, np.float64):
        return data.astype(np.float32)
    raise ExtractorError(f"{path}: unsupported sample format {data.dtype}")


def write_emb1(streams: np.ndarray, path: str) -> None:
    """streams: (n_layers, T, dim) float array, written atomically."""
    n_layers, t, dim = streams.shape
    payload = np.ascontiguousarray(streams, dtype="<f4")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".emb1.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(HEADER.pack(MAGIC, n_layers, dim, t))
            fh.write(payload.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_manifest(path: str):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_FIELDS) - set(reader.fieldnames or [])
        if missing:
            raise ExtractorError(f"{path}: manifest missing columns {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise ExtractorError(f"{path}: empty manifest")
    base = os.path.dirname(os.path.abspath(path))
    for row in rows:
        if not os.path.isabs(row["audio_path"]):
            row["audio_path"] = os.path.join(base, row["audio_path"])
    return rows


def extract_streams(model, wave: np.ndarray) -> np.ndarray:
    """(13, T, 768) hidden-state cube for one utterance."""
    with torch.no_grad():
        out = model(
            torch.from_numpy(wave)[None, :].to(next(model.parameters()).device),
            output_hidden_states=True,
        )
    states = out.hidden_states
    if len(states) != EXPECTED_CONTEXT_LAYERS + 1:
        raise ExtractorError(
            f"model returned {len(states)} hidden-state streams, "
            f"expected {EXPECTED_CONTEXT_LAYERS + 1}"
        )
    cube = np.stack([s[0].cpu().numpy() for s in states])
    if cube.shape[2] != EXPECTED_DIM:
        raise ExtractorError(f"stream width {cube.shape[2]} != {EXPECTED_DIM}")
    return cube


def extract(cfg: ExtractorConfig, model=None, log=sys.stderr):
    """Extract bundles for every manifest row.

    Unreadable audio is skipped with a per-file error line on `log`;
    successful rows land in the output manifest with embedding_path
    filled.  Returns (n_written, errors).
    """
    rows = _read_manifest(cfg.manifest)
    if model is None:
        model = load_model(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    written, errors = [], []
    for row in rows:
        try:
            wave = read_wav_16k_mono(row["audio_path"])
            cube = extract_streams(model, wave)
            want = expected_frames(model, len(wave))
            if cube.shape[1] != want:
                raise ExtractorError(
                    f"{row['id']}: got {cube.shape[1]} frames, model reports {want}"
                )
            out_path = os.path.join(cfg.out_dir, row["id"] + ".emb1")
            write_emb1(cube, out_path)
            row["embedding_path"] = out_path
            written.append(row)
        except (OSError, ValueError, ExtractorError) as err:
            errors.append((row["id"], str(err)))
            print(f"error: {row['id']}: {err}", file=log)
    out_manifest = os.path.join(cfg.out_dir, "manifest.csv")
    with open(out_manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(written)
    return len(written), errors
