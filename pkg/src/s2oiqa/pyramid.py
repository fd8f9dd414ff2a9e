"""Gaussian and Laplacian pyramid construction (Burt-Adelson kernel)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DepthError, ShapeError
from .raster import Raster

# 5-tap binomial generating kernel; full 5x5 outer product sums to 1.
KERNEL_1D = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def _reflect_pad(a: np.ndarray, pad: int) -> np.ndarray:
    # mirror-without-repeat boundary
    return np.pad(a, pad, mode="reflect")


def _conv5_separable(a: np.ndarray) -> np.ndarray:
    p = _reflect_pad(a, 2)
    # rows
    tmp = sum(KERNEL_1D[k] * p[:, k:k + a.shape[1]] for k in range(5))
    out = sum(KERNEL_1D[k] * tmp[k:k + a.shape[0], :] for k in range(5))
    return out


@dataclass(frozen=True)
class GaussianPyramid:
    layers: tuple[np.ndarray, ...]  # layer 0 is the source image


@dataclass(frozen=True)
class LaplacianPyramid:
    layers: tuple[np.ndarray, ...]  # signed residuals, one fewer than Gaussian


def _reduce(a: np.ndarray) -> np.ndarray:
    return _conv5_separable(a)[::2, ::2]


def build_gaussian(v: Raster | np.ndarray, n_layers: int) -> GaussianPyramid:
    """Iterated filter-then-decimate; layer dims halve (ceil) each level."""
    a = v.data if isinstance(v, Raster) else np.asarray(v, dtype=np.float64)
    if n_layers < 2:
        raise DepthError("pyramid needs at least 2 layers")
    h, w = a.shape
    for _ in range(n_layers - 1):
        h, w = (h + 1) // 2, (w + 1) // 2
    if h < 8 or w < 8:
        raise DepthError(f"smallest layer {h}x{w} below 8x8 floor")
    layers = [a]
    for _ in range(n_layers - 1):
        layers.append(_reduce(layers[-1]))
    return GaussianPyramid(tuple(layers))


def expand(g: np.ndarray, target_h: int, target_w: int) -> np.ndarray:
    """Zero-interleave upsampling followed by the 5x5 kernel scaled by 4."""
    h, w = g.shape
    if target_h not in (2 * h - 1, 2 * h) or target_w not in (2 * w - 1, 2 * w):
        raise ShapeError(f"cannot expand {h}x{w} to {target_h}x{target_w}")
    up = np.zeros((target_h, target_w))
    up[::2, ::2] = g
    return 4.0 * _conv5_separable(up)


def build_laplacian(gp: GaussianPyramid) -> LaplacianPyramid:
    """L_i = G_i - expand(G_{i+1})."""
    if len(gp.layers) < 2:
        raise DepthError("need >= 2 Gaussian layers")
    out = []
    for cur, nxt in zip(gp.layers, gp.layers[1:]):
        out.append(cur - expand(nxt, *cur.shape))
    return LaplacianPyramid(tuple(out))
