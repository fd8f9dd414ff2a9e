"""Synthetic desk-scale corpus: procedural equirectangular images, codec-style
distortion ladders, proxy MOS labels, and synthetic semantic feature files."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.fft import dctn, idctn
from scipy.ndimage import gaussian_filter

from .formats import (KIND_LOGITS, KIND_SEMANTIC_FC1, MANIFEST_HEADER,
                      write_feature_file)
from .raster import Raster, encode_image
from .semfeat import FC1_DIM, N_CLASSES

QUALITY_LEVELS = (95, 80, 60, 40, 20, 10)
LADDERS = ("JPEG", "AVC", "HEVC")


def make_pristine(seed: int, height: int = 256) -> Raster:
    """Procedural 2:1 texture with structure at several scales."""
    rng = np.random.default_rng(seed)
    h, w = height, 2 * height
    img = np.zeros((h, w))
    for sigma, amp in ((32, 80.0), (8, 40.0), (2, 25.0)):
        img += amp * gaussian_filter(rng.standard_normal((h, w)), sigma,
                                     mode="wrap") * (sigma / 2)
    yy, xx = np.mgrid[0:h, 0:w]
    img += 30 * np.sin(2 * np.pi * xx / w * rng.integers(2, 6)
                       + 2 * np.pi * yy / h * rng.integers(1, 4))
    img += 8 * rng.standard_normal((h, w))
    img = 128 + 90 * (img - img.mean()) / (3 * img.std())
    return Raster(np.clip(img, 0, 255))


def _block_dct_quantize(a: np.ndarray, block: int, step: np.ndarray) -> np.ndarray:
    h, w = a.shape
    out = np.empty_like(a)
    for r in range(0, h, block):
        for c in range(0, w, block):
            tile = a[r:r + block, c:c + block]
            coef = dctn(tile, norm="ortho")
            s = step[:tile.shape[0], :tile.shape[1]]
            out[r:r + block, c:c + block] = idctn(np.round(coef / s) * s, norm="ortho")
    return out


def distort(img: Raster, ladder: str, quality: int) -> Raster:
    """Codec-style degradation; lower quality means stronger distortion."""
    a = img.data.copy()
    severity = ((100 - quality) / 100.0) ** 0.8
    if ladder == "JPEG":
        i, j = np.mgrid[0:8, 0:8]
        step = 1.0 + (1.0 + i + j) * 12.0 * severity
        a = _block_dct_quantize(a, 8, step)
        a = gaussian_filter(a, 0.3 * severity)
    elif ladder == "AVC":
        i, j = np.mgrid[0:16, 0:16]
        step = 1.0 + (1.0 + 0.5 * (i + j)) * 10.0 * severity
        a = _block_dct_quantize(a, 16, step)
        a = gaussian_filter(a, 0.8 * severity)
    else:  # HEVC-like: larger transform, gentler blocking, more smoothing
        i, j = np.mgrid[0:32, 0:32]
        step = 1.0 + (1.0 + 0.25 * (i + j)) * 8.0 * severity
        a = _block_dct_quantize(a, 32, step)
        a = gaussian_filter(a, 1.2 * severity)
    return Raster(np.clip(a, 0, 255))


def proxy_mos(quality: int, rng) -> float:
    """Monotone function of quality with bounded noise."""
    base = 8.0 + 88.0 * (quality / 100.0) ** 0.6
    return float(np.clip(base + rng.uniform(-2.0, 2.0), 0.0, 100.0))


def synth_semantic_files(out_dir: Path, name: str, source_seed: int,
                         quality: int) -> tuple[str, str]:
    """Quality-correlated synthetic FC1/logit files for protocol tests."""
    rng_base = np.random.default_rng(source_seed)
    base = rng_base.standard_normal(FC1_DIM)
    rng = np.random.default_rng([source_seed, quality])
    s = quality / 100.0
    fc1 = np.abs(base) * (0.3 + 0.7 * s) + 0.05 * rng.standard_normal(FC1_DIM)
    logits = 0.2 * rng_base.standard_normal(N_CLASSES)
    top = int(rng_base.integers(N_CLASSES))
    logits[top] += 2.0 + 8.0 * s  # peak confidence decays with distortion
    fc1_path = out_dir / f"{name}.fc1.s2fv"
    log_path = out_dir / f"{name}.logits.s2fv"
    write_feature_file(fc1_path, KIND_SEMANTIC_FC1, fc1, source_tag="synthetic")
    write_feature_file(log_path, KIND_LOGITS, logits, source_tag="synthetic")
    return fc1_path.name, log_path.name


def build_desk_corpus(out_dir, n_sources: int = 8, seed: int = 1234,
                      height: int = 256, semantic: bool = True) -> Path:
    """Write images, feature files, and a manifest; returns manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lines = [MANIFEST_HEADER]
    for s_idx in range(n_sources):
        src_seed = seed + 1000 * (s_idx + 1)
        pristine = make_pristine(src_seed, height)
        ladder = LADDERS[s_idx % len(LADDERS)]
        for q in QUALITY_LEVELS:
            name = f"src{s_idx:02d}_{ladder.lower()}_q{q:03d}"
            img = distort(pristine, ladder, q)
            (out_dir / f"{name}.png").write_bytes(encode_image(img, "PNG"))
            mos = proxy_mos(q, rng)
            fields = [f"{name}.png", f"{mos:.4f}", f"src{s_idx:02d}", ladder]
            if semantic:
                fc1, logits = synth_semantic_files(out_dir, name, src_seed, q)
                fields += [fc1, logits]
            lines.append("\t".join(fields))
    manifest_path = out_dir / "manifest.s2m"
    manifest_path.write_text("\n".join(lines) + "\n")
    return manifest_path
