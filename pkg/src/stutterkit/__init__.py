"""Disfluency-classification toolkit: features, models, losses, evaluation."""

__version__ = "0.1.0"

from .labels import ClassLabel, DatasetManifest, UtteranceRecord, class_weights, is_fluent
from .embio import (
    EmbeddingBundle,
    EmbeddingSequence,
    PooledVector,
    concat_pooled,
    concat_sequences,
    pool,
    read_bundle,
    sum_layers,
    write_bundle,
)
from .evalreport import ConfusionMatrix, MetricsReport, confusion, metrics, uar_from_recalls
