"""Blind omnidirectional image quality assessment combining multi-viewport
statistics with global semantic features."""

from .errors import (AspectError, ConvergenceError, CorruptFile, DecodeError,
                     DegenerateInput, DepthError, InvalidArgument,
                     MissingFeature, S2Error, SchemaError, ShapeError,
                     UnsupportedFormat)
from .fusion_eval import (EvalReport, PipelineConfig, QualityScore, fuse,
                          logistic_fit, plcc_rmse, run_ablation, run_protocol,
                          srocc)
from .pipeline import extract_stat_features
from .raster import Raster, decode_image, encode_image, load_image, psnr, resize_bilinear
from .regress import (ScalingParams, SvrModel, grid_search, scale_fit_transform,
                      svr_predict, svr_train)
from .semfeat import SemanticFeatureVector, load_semantic_features, semantic_confidence
from .sphere import (SphereDirection, ViewportSpec, cpp_psnr, render_viewport,
                     s_psnr, sample_viewports, ws_psnr)
from .statfeat import (aggregate_viewports, extract_viewport_features,
                       lbp_histogram, mscn_features)

__version__ = "0.1.0"
