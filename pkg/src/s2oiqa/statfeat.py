"""Statistic-path features: uniform LBP histograms on Gaussian layers and
MSCN/NSS features on Laplacian layers, concatenated per viewport."""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate
from scipy.special import gamma as gamma_fn

from .errors import InvalidArgument, ShapeError
from .pyramid import build_gaussian, build_laplacian
from .raster import Raster

N_GP_LAYERS = 3
N_LP_LAYERS = 2
LBP_BINS = 59
MSCN_FEATURES = 36
GP_DIM = N_GP_LAYERS * LBP_BINS   # 177
LP_DIM = N_LP_LAYERS * MSCN_FEATURES  # 72
STAT_DIM = GP_DIM + LP_DIM        # 249

# degenerate-fit floors for zero-variance inputs
_FLOOR_SHAPE = 10.0
_FLOOR_VAR = 1e-6


def _uniform_lut() -> np.ndarray:
    """Map 8-bit LBP codes to 59 bins: 58 uniform patterns + 1 catch-all."""
    lut = np.full(256, 58, dtype=np.intp)
    nxt = 0
    for code in range(256):
        bits = [(code >> k) & 1 for k in range(8)]
        transitions = sum(bits[k] != bits[(k + 1) % 8] for k in range(8))
        if transitions <= 2:
            lut[code] = nxt
            nxt += 1
    assert nxt == 58
    return lut


_LUT = _uniform_lut()

# 8 circular neighbors, radius 1, starting at angle 0 going counterclockwise
_ANGLES = [2 * math.pi * k / 8 for k in range(8)]
_OFFSETS = [(-math.sin(t), math.cos(t)) for t in _ANGLES]  # (drow, dcol)


def _neighbor_plane(a: np.ndarray, drow: float, dcol: float) -> np.ndarray:
    """Bilinear sample of a at (r+drow, c+dcol) for interior pixels."""
    h, w = a.shape
    if abs(drow - round(drow)) < 1e-9:
        drow = float(round(drow))
    if abs(dcol - round(dcol)) < 1e-9:
        dcol = float(round(dcol))
    r0 = int(math.floor(drow))
    c0 = int(math.floor(dcol))
    fr, fc = drow - r0, dcol - c0
    # interior window [1, h-1) x [1, w-1); offsets stay in bounds for radius 1
    def shifted(dr, dc):
        return a[1 + dr:h - 1 + dr, 1 + dc:w - 1 + dc]
    if fr < 1e-12 and fc < 1e-12:
        return shifted(r0, c0)
    return ((1 - fr) * (1 - fc) * shifted(r0, c0)
            + (1 - fr) * fc * shifted(r0, c0 + 1)
            + fr * (1 - fc) * shifted(r0 + 1, c0)
            + fr * fc * shifted(r0 + 1, c0 + 1))


def lbp_histogram(layer: Raster | np.ndarray) -> np.ndarray:
    """Normalized 59-bin uniform LBP histogram (P=8, R=1, >= comparison)."""
    a = layer.data if isinstance(layer, Raster) else np.asarray(layer, dtype=np.float64)
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise ShapeError(f"layer {a.shape} too small for radius-1 LBP")
    center = a[1:-1, 1:-1]
    code = np.zeros(center.shape, dtype=np.intp)
    for bit, (drow, dcol) in enumerate(_OFFSETS):
        # bilinear sampling leaves tiny rounding noise; tolerance keeps
        # exactly-equal neighbors on the >= side
        code |= (_neighbor_plane(a, drow, dcol) >= center - 1e-9) << bit
    hist = np.bincount(_LUT[code].ravel(), minlength=LBP_BINS).astype(np.float64)
    return hist / hist.sum()


def _gauss_window(size: int = 7, sigma: float = 7.0 / 6.0) -> np.ndarray:
    half = size // 2
    x = np.arange(-half, half + 1)
    g = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / (2 * sigma ** 2))
    return g / g.sum()


_WIN = _gauss_window()


def mscn_map(a: np.ndarray, c: float = 1.0) -> np.ndarray:
    """Mean-subtracted contrast-normalized coefficients."""
    mu = correlate(a, _WIN, mode="reflect")
    sigma = np.sqrt(np.maximum(correlate(a * a, _WIN, mode="reflect") - mu * mu, 0.0))
    return (a - mu) / (sigma + c)


def _gamma_ratio(alpha: np.ndarray) -> np.ndarray:
    return gamma_fn(2.0 / alpha) ** 2 / (gamma_fn(1.0 / alpha) * gamma_fn(3.0 / alpha))


_ALPHA_GRID = np.arange(0.2, 10.0 + 1e-9, 1e-3)
_RATIO_GRID = _gamma_ratio(_ALPHA_GRID)


def _invert_gamma_ratio(target: float) -> float:
    """Shape alpha whose gamma ratio matches target (grid + local refinement)."""
    idx = int(np.argmin(np.abs(_RATIO_GRID - target)))
    lo = max(idx - 1, 0)
    hi = min(idx + 1, len(_ALPHA_GRID) - 1)
    a_lo, a_hi = _ALPHA_GRID[lo], _ALPHA_GRID[hi]
    for _ in range(40):  # bisection-style refinement on the monotone ratio
        mid = 0.5 * (a_lo + a_hi)
        if _gamma_ratio(np.array([mid]))[0] < target:
            a_lo = mid
        else:
            a_hi = mid
    return 0.5 * (a_lo + a_hi)


def fit_ggd(x: np.ndarray) -> tuple[float, float]:
    """Moment-matched generalized Gaussian fit: (shape, variance)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    var = float(np.mean(x * x))
    mean_abs = float(np.mean(np.abs(x)))
    if var < 1e-12 or mean_abs < 1e-12:
        return _FLOOR_SHAPE, _FLOOR_VAR
    rho = mean_abs ** 2 / var
    return _invert_gamma_ratio(rho), var


def fit_aggd(x: np.ndarray) -> tuple[float, float, float, float]:
    """Asymmetric GGD fit: (shape, mean, left variance, right variance)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    left = x[x < 0]
    right = x[x >= 0]
    if len(left) == 0 or len(right) == 0 or float(np.mean(x * x)) < 1e-12:
        return _FLOOR_SHAPE, 0.0, _FLOOR_VAR, _FLOOR_VAR
    sigma_l = math.sqrt(float(np.mean(left ** 2)))
    sigma_r = math.sqrt(float(np.mean(right ** 2)))
    if sigma_l < 1e-9 or sigma_r < 1e-9:
        return _FLOOR_SHAPE, 0.0, _FLOOR_VAR, _FLOOR_VAR
    gamma_hat = sigma_l / sigma_r
    r_hat = float(np.mean(np.abs(x))) ** 2 / float(np.mean(x * x))
    big_r = r_hat * (gamma_hat ** 3 + 1) * (gamma_hat + 1) / (gamma_hat ** 2 + 1) ** 2
    alpha = _invert_gamma_ratio(big_r)
    g1, g2, g3 = gamma_fn(1 / alpha), gamma_fn(2 / alpha), gamma_fn(3 / alpha)
    eta = (sigma_r - sigma_l) * (g2 / g1) * math.sqrt(g1 / g3)
    return alpha, eta, sigma_l ** 2, sigma_r ** 2


_ORIENT_SHIFTS = [(0, 1), (1, 0), (1, 1), (1, -1)]  # H, V, D1, D2


def _nss_18(a: np.ndarray) -> list[float]:
    m = mscn_map(a)
    shape, var = fit_ggd(m)
    feats = [shape, var]
    for dr, dc in _ORIENT_SHIFTS:
        h, w = m.shape
        r0, r1 = max(dr, 0), h + min(dr, 0)
        c0, c1 = max(dc, 0), w + min(dc, 0)
        prod = m[r0:r1, c0:c1] * m[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
        feats.extend(fit_aggd(prod))
    return feats


def mscn_features(layer: Raster | np.ndarray) -> np.ndarray:
    """18 NSS features at two scales (full and 2x decimated) = 36 values."""
    a = layer.data if isinstance(layer, Raster) else np.asarray(layer, dtype=np.float64)
    if a.shape[0] < 16 or a.shape[1] < 16:
        raise ShapeError(f"layer {a.shape} too small for MSCN features")
    feats = _nss_18(a)
    half = 0.25 * (a[0::2, 0::2][:a.shape[0] // 2, :a.shape[1] // 2]
                   + a[1::2, 0::2][:a.shape[0] // 2, :a.shape[1] // 2]
                   + a[0::2, 1::2][:a.shape[0] // 2, :a.shape[1] // 2]
                   + a[1::2, 1::2][:a.shape[0] // 2, :a.shape[1] // 2])
    feats += _nss_18(half)
    return np.array(feats)


def extract_viewport_features(v: Raster) -> np.ndarray:
    """249-dim statistic vector: 3x59 LBP on Gaussian layers, 2x36 NSS on
    Laplacian layers, concatenated."""
    gp = build_gaussian(v, N_GP_LAYERS)
    lp = build_laplacian(gp)
    parts = [lbp_histogram(layer) for layer in gp.layers]
    parts += [mscn_features(layer) for layer in lp.layers[:N_LP_LAYERS]]
    out = np.concatenate(parts)
    assert out.shape == (STAT_DIM,)
    return out


def aggregate_viewports(features: list[np.ndarray]) -> np.ndarray:
    """Coordinate-wise mean across viewports."""
    if not features:
        raise InvalidArgument("empty feature list")
    return np.mean(np.stack(features), axis=0)
