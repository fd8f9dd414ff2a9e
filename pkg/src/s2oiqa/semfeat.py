"""Semantic-path feature ingestion and semantic-confidence computation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, SchemaError
from .formats import KIND_LOGITS, KIND_SEMANTIC_FC1, read_feature_file

FC1_DIM = 4096
N_CLASSES = 1000


@dataclass(frozen=True)
class SemanticFeatureVector:
    fc1: np.ndarray              # 4096 values
    logits: np.ndarray | None    # 1000 values when present
    source_tag: str

    def __post_init__(self):
        if self.fc1.shape != (FC1_DIM,):
            raise SchemaError(f"fc1 must have {FC1_DIM} entries, got {self.fc1.shape}")
        if self.logits is not None and self.logits.shape != (N_CLASSES,):
            raise SchemaError(f"logits must have {N_CLASSES} entries, got {self.logits.shape}")


def load_semantic_features(fc1_path, logits_path=None) -> SemanticFeatureVector:
    """Load and validate FC1 (and optional logits) feature files."""
    kind, fc1, tag = read_feature_file(fc1_path)
    if kind != KIND_SEMANTIC_FC1:
        raise SchemaError(f"{fc1_path}: expected semantic-fc1 file, got kind {kind}")
    logits = None
    if logits_path is not None:
        lkind, logits, _ = read_feature_file(logits_path)
        if lkind != KIND_LOGITS:
            raise SchemaError(f"{logits_path}: expected logits file, got kind {lkind}")
    return SemanticFeatureVector(fc1=fc1, logits=logits, source_tag=tag)


def semantic_confidence(logits: np.ndarray) -> float:
    """Max softmax probability, computed with max-subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise InvalidArgument("logits must be finite")
    z = z - z.max()
    e = np.exp(z)
    return float(e.max() / e.sum())
