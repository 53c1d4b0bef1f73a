"""Wav2Vec2 base hidden-state extractor emitting EMB1 bundles."""

from .extract import (
    ExtractorConfig,
    ExtractorError,
    check_model_shape,
    expected_frames,
    extract,
    load_model,
    write_emb1,
)

__all__ = [
    "ExtractorConfig",
    "ExtractorError",
    "check_model_shape",
    "expected_frames",
    "extract",
    "load_model",
    "write_emb1",
]
