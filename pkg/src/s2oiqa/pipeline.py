"""End-to-end statistic-path feature extraction for one omnidirectional image."""

from __future__ import annotations

import numpy as np

from .raster import Raster
from .sphere import sample_viewports, render_viewport
from .statfeat import aggregate_viewports, extract_viewport_features


def extract_stat_features(omni: Raster, n_viewports: int = 6,
                          pooled: bool = True) -> np.ndarray:
    """Render viewports and extract the 249-dim statistic feature vector.

    With pooled=False, returns the (n_viewports, 249) per-viewport matrix.
    """
    specs = sample_viewports(n_viewports)
    feats = [extract_viewport_features(render_viewport(omni, s)) for s in specs]
    if pooled:
        return aggregate_viewports(feats)
    return np.stack(feats)
