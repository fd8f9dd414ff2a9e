"""Single-image extraction jobs: image -> FC1 + logit feature files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from s2oiqa.formats import KIND_LOGITS, KIND_SEMANTIC_FC1, write_feature_file

from .backbone import INPUT_SIZE, forward, load_weights, _check_arch
from .errors import DecodeError

# input normalization applied before the network (substitute for the
# published per-channel mean subtraction of the original models)
_INPUT_MEAN = 128.0
_INPUT_SCALE = 64.0


@dataclass(frozen=True)
class ExtractionJob:
    image_path: str
    architecture: str
    output_fc1_path: str
    output_logits_path: str


def source_tag(arch: str) -> str:
    """Provenance tag recorded in emitted files.

    Names the architecture, flags the fixed-seed substitute backbone, and
    records the aspect-distorting resize preprocessing.
    """
    return f"{_check_arch(arch)}-substitute-seeded/resize{INPUT_SIZE}"


def preprocess(image_path) -> np.ndarray:
    """Decode, aspect-distorting resize to the network input, normalize."""
    try:
        with Image.open(image_path) as im:
            rgb = im.convert("RGB").resize((INPUT_SIZE, INPUT_SIZE),
                                           Image.BILINEAR)
    except UnidentifiedImageError as e:
        raise DecodeError(f"{image_path}: {e}") from e
    x = np.asarray(rgb, dtype=np.float32)
    return (x - np.float32(_INPUT_MEAN)) / np.float32(_INPUT_SCALE)


def extract(job: ExtractionJob) -> tuple[Path, Path]:
    """Run one job; returns the two written file paths."""
    arch = _check_arch(job.architecture)
    load_weights(arch)  # fail early (WeightsError domain) before decoding
    x = preprocess(job.image_path)
    fc1, logits = forward(arch, x)
    tag = source_tag(arch)
    write_feature_file(job.output_fc1_path, KIND_SEMANTIC_FC1,
                       fc1.astype(np.float64), source_tag=tag)
    write_feature_file(job.output_logits_path, KIND_LOGITS,
                       logits.astype(np.float64), source_tag=tag)
    return Path(job.output_fc1_path), Path(job.output_logits_path)
