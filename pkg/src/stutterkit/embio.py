"""Multi-layer embedding bundles: binary EMB1 format, statistical pooling,
layer selection / concatenation / summation.

EMB1 layout (little-endian): magic ``EMB1``, u32 n_layers, u32 dim, u32 T,
then n_layers * T * dim float32 values in [layer][frame][dim] order.  Files
are written atomically (temp + rename).
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import BadMagic, EmptySequence, FrameCountMismatch, TruncatedPayload

MAGIC = b"EMB1"
HEADER = struct.Struct("<4sIII")

# Wav2Vec2 base bundles: feature-projection stream (index 0) + 12 context layers.
N_W2V2_STREAMS = 13
W2V2_DIM = 768


@dataclass(frozen=True)
class EmbeddingSequence:
    """A dim x T frame-level feature matrix (e.g. 20 x T MFCC, 768 x T layer)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise EmptySequence(f"need a non-empty dim x T matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("embedding sequence contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def T(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class EmbeddingBundle:
    """All layer streams of one utterance; layers share (dim, T)."""

    layers: tuple[EmbeddingSequence, ...]

    def __post_init__(self):
        if not self.layers:
            raise EmptySequence("bundle needs at least one layer")
        layers = tuple(self.layers)
        shape = (layers[0].dim, layers[0].T)
        for layer in layers:
            if (layer.dim, layer.T) != shape:
                raise FrameCountMismatch(shape, (layer.dim, layer.T))
        object.__setattr__(self, "layers", layers)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def dim(self) -> int:
        return self.layers[0].dim

    @property
    def T(self) -> int:
        return self.layers[0].T


@dataclass(frozen=True)
class PooledVector:
    """mean || std pooling output; length 2 * dim."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or len(values) == 0 or len(values) % 2:
            raise ValueError(f"pooled vector must have even positive length, got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return len(self.values) // 2


def write_bundle(bundle: EmbeddingBundle, path: str) -> None:
    """Write an EMB1 file; round-trips bit-exactly at float32."""
    payload = np.stack([np.ascontiguousarray(l.data.T, dtype="<f4") for l in bundle.layers])
    header = HEADER.pack(MAGIC, bundle.n_layers, bundle.dim, bundle.T)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".emb1.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_bundle(path: str) -> EmbeddingBundle:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER.size:
        raise TruncatedPayload(f"{path}: file shorter than header")
    magic, n_layers, dim, t = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagic(f"{path}: bad magic {magic!r}")
    if not (n_layers and dim and t):
        raise TruncatedPayload(f"{path}: zero-sized dimensions ({n_layers}, {dim}, {t})")
    expected = HEADER.size + 4 * n_layers * dim * t
    if len(raw) != expected:
        raise TruncatedPayload(f"{path}: expected {expected} bytes, found {len(raw)}")
    flat = np.frombuffer(raw, dtype="<f4", offset=HEADER.size)
    cube = flat.reshape(n_layers, t, dim)
    return EmbeddingBundle(
        layers=tuple(EmbeddingSequence(cube[i].T) for i in range(n_layers))
    )


def pool(seq: EmbeddingSequence) -> PooledVector:
    """Concatenated per-dimension mean and population std over frames.

    T = 1 yields zero std.
    """
    mean = seq.data.mean(axis=1)
    std = seq.data.std(axis=1)  # population (divide by T)
    return PooledVector(np.concatenate([mean, std]))


def concat_pooled(a: PooledVector, b: PooledVector) -> PooledVector:
    return PooledVector(np.concatenate([a.values, b.values]))


def concat_sequences(a: EmbeddingSequence, b: EmbeddingSequence) -> EmbeddingSequence:
    """Frame-wise feature concatenation; requires equal frame counts."""
    if a.T != b.T:
        raise FrameCountMismatch(a.T, b.T)
    return EmbeddingSequence(np.concatenate([a.data, b.data], axis=0))


def sum_layers(bundle: EmbeddingBundle, indices) -> EmbeddingSequence:
    """Elementwise sum of the selected layer streams."""
    indices = sorted(set(int(i) for i in indices))
    if not indices:
        raise EmptySequence("sum_layers needs at least one layer index")
    for i in indices:
        if not 0 <= i < bundle.n_layers:
            raise IndexError(f"layer index {i} out of range [0, {bundle.n_layers})")
    total = np.zeros_like(bundle.layers[0].data)
    for i in indices:
        total = total + bundle.layers[i].data
    return EmbeddingSequence(total)
