"""Offline CNN feature extractor for the s2oiqa semantic path."""

from .backbone import (FC1_DIM, INPUT_SIZE, N_CLASSES, architecture_names,
                       forward, load_weights, softmax_confidence)
from .errors import DecodeError, ExtractorError, InvalidArgument, WeightsError
from .extract import ExtractionJob, extract, preprocess, source_tag

__version__ = "0.1.0"

__all__ = [
    "FC1_DIM", "INPUT_SIZE", "N_CLASSES", "architecture_names", "forward",
    "load_weights", "softmax_confidence", "DecodeError", "ExtractorError",
    "InvalidArgument", "WeightsError", "ExtractionJob", "extract",
    "preprocess", "source_tag", "__version__",
]
