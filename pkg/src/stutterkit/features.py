"""Feature-source resolution: map a feature spec string and an utterance
record to a frame sequence or a pooled vector.

Spec grammar:
  mfcc               MFCCs computed from audio_path (20 x T)
  layer:K            bundle stream K (0 = feature-projection, 1..12 = context)
  concat:K,J,...     frame-wise concatenation of bundle streams
  sum:K,J,... | sum:all   elementwise sum of bundle streams
  mfcc:layer:K       pooled-only: pooled MFCC || pooled stream K
"""

from __future__ import annotations

from .audio import mfcc, read_wav
from .embio import (
    EmbeddingSequence,
    concat_pooled,
    concat_sequences,
    pool,
    read_bundle,
    sum_layers,
    N_W2V2_STREAMS,
)
from .errors import ConfigError, MissingFile
from .labels import UtteranceRecord


def parse_feature_spec(spec: str) -> dict:
    spec = spec.strip().lower()
    if spec == "mfcc":
        return {"kind": "mfcc"}
    if spec.startswith("mfcc:layer:"):
        return {"kind": "mfcc+layer", "layer": _index(spec.rsplit(":", 1)[1])}
    if spec.startswith("layer:"):
        return {"kind": "layer", "layer": _index(spec.split(":", 1)[1])}
    if spec.startswith("concat:"):
        return {"kind": "concat", "layers": _indices(spec.split(":", 1)[1])}
    if spec.startswith("sum:"):
        arg = spec.split(":", 1)[1]
        layers = list(range(N_W2V2_STREAMS)) if arg == "all" else _indices(arg)
        return {"kind": "sum", "layers": layers}
    raise ConfigError(f"unrecognized feature spec {spec!r}")


def _index(text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"bad layer index {text!r}") from None


def _indices(text):
    return [_index(part) for part in text.split(",") if part.strip()]


def _bundle(record: UtteranceRecord):
    if not record.embedding_path:
        raise MissingFile(f"record {record.id!r} has no embedding_path")
    return read_bundle(record.embedding_path)


def _mfcc_sequence(record: UtteranceRecord) -> EmbeddingSequence:
    if not record.audio_path:
        raise MissingFile(f"record {record.id!r} has no audio_path")
    return mfcc(read_wav(record.audio_path))


def sequence_feature(record: UtteranceRecord, spec) -> EmbeddingSequence:
    """Frame-level feature for a feature-spec string; rejects pooled-only kinds."""
    if isinstance(spec, str):
        spec = parse_feature_spec(spec)
    kind = spec["kind"]
    if kind == "mfcc":
        return _mfcc_sequence(record)
    if kind == "layer":
        bundle = _bundle(record)
        return bundle.layers[spec["layer"]]
    if kind == "concat":
        bundle = _bundle(record)
        seq = bundle.layers[spec["layers"][0]]
        for k in spec["layers"][1:]:
            seq = concat_sequences(seq, bundle.layers[k])
        return seq
    if kind == "sum":
        return sum_layers(_bundle(record), spec["layers"])
    if kind == "mfcc+layer":
        raise ConfigError("mfcc:layer:K is a pooled-vector feature; sequence models cannot use it")
    raise ConfigError(f"unknown feature kind {kind!r}")


def pooled_feature(record: UtteranceRecord, spec):
    """Statistical-pooling vector for a feature-spec string (numpy array)."""
    if isinstance(spec, str):
        spec = parse_feature_spec(spec)
    if spec["kind"] == "mfcc+layer":
        a = pool(_mfcc_sequence(record))
        b = pool(_bundle(record).layers[spec["layer"]])
        return concat_pooled(a, b).values
    return pool(sequence_feature(record, spec)).values
