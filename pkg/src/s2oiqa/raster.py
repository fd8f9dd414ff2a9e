"""Grayscale raster container, image decoding, resizing, and plain PSNR."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, InvalidArgument, ShapeError, UnsupportedFormat

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])

PSNR_INF = float("inf")


@dataclass(frozen=True)
class Raster:
    """Row-major grayscale image with float64 samples in [0, 255]."""

    data: np.ndarray  # shape (height, width), float64

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise InvalidArgument(f"raster must be 2-D and non-empty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidArgument("raster contains non-finite samples")
        if a.min() < 0.0 or a.max() > 255.0:
            raise InvalidArgument("raster samples must lie in [0, 255]")
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def _luma(rgb: np.ndarray) -> np.ndarray:
    return rgb.astype(np.float64) @ _LUMA


def _decode_ppm(data: bytes) -> Raster:
    # Minimal P3/P6 parser (also accepts P2/P5 grayscale).
    pos = 0

    def token():
        nonlocal pos
        while True:
            while pos < len(data) and data[pos:pos + 1].isspace():
                pos += 1
            if pos < len(data) and data[pos:pos + 1] == b"#":
                while pos < len(data) and data[pos:pos + 1] != b"\n":
                    pos += 1
                continue
            break
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DecodeError("truncated PNM header")
        return data[start:pos]

    magic = token().decode("ascii", "replace")
    if magic not in ("P2", "P3", "P5", "P6"):
        raise DecodeError(f"not a PNM file (magic {magic!r})")
    try:
        w, h, maxval = int(token()), int(token()), int(token())
    except ValueError as e:
        raise DecodeError(f"bad PNM header: {e}") from None
    if w < 1 or h < 1:
        raise DecodeError("non-positive PNM dimensions")
    if maxval > 255:
        raise UnsupportedFormat(f"PNM maxval {maxval} exceeds 8-bit range")
    if maxval < 1:
        raise DecodeError("invalid PNM maxval")
    channels = 3 if magic in ("P3", "P6") else 1
    n = w * h * channels
    if magic in ("P5", "P6"):
        pos += 1  # single whitespace after maxval
        raw = data[pos:pos + n]
        if len(raw) < n:
            raise DecodeError("truncated PNM payload")
        vals = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
    else:
        try:
            vals = np.array([int(token()) for _ in range(n)], dtype=np.float64)
        except DecodeError:
            raise DecodeError("truncated PNM payload") from None
    if vals.min() < 0 or vals.max() > maxval:
        raise DecodeError("PNM sample out of declared range")
    vals *= 255.0 / maxval
    if channels == 3:
        return Raster(_luma(vals.reshape(h, w, 3)))
    return Raster(vals.reshape(h, w))


def decode_image(data: bytes, fmt: str | None = None) -> Raster:
    """Decode PNG/PPM/BMP bytes to a grayscale raster (BT.601 luma)."""
    if fmt is None:
        if data[:2] in (b"P2", b"P3", b"P5", b"P6"):
            fmt = "PPM"
        elif data[:8] == b"\x89PNG\r\n\x1a\n":
            fmt = "PNG"
        elif data[:2] == b"BM":
            fmt = "BMP"
        else:
            raise DecodeError("unrecognized image signature")
    fmt = fmt.upper()
    if fmt == "PPM":
        return _decode_ppm(data)
    if fmt not in ("PNG", "BMP"):
        raise UnsupportedFormat(f"unsupported format {fmt}")
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        raise DecodeError(f"cannot decode {fmt}: {e}") from None
    if img.mode in ("I;16", "I;16B", "I", "I;16L"):
        raise UnsupportedFormat(f"unsupported bit depth (mode {img.mode})")
    if img.mode == "L":
        return Raster(np.asarray(img, dtype=np.float64))
    rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    return Raster(_luma(rgb))


def load_image(path) -> Raster:
    with open(path, "rb") as f:
        return decode_image(f.read())


def encode_image(r: Raster, fmt: str = "PNG") -> bytes:
    """Encode (rounded to 8-bit) as PNG, BMP, or binary P5 PGM."""
    q = np.clip(np.rint(r.data), 0, 255).astype(np.uint8)
    fmt = fmt.upper()
    if fmt in ("PPM", "PGM"):
        return b"P5\n%d %d\n255\n" % (r.width, r.height) + q.tobytes()
    if fmt not in ("PNG", "BMP"):
        raise UnsupportedFormat(f"unsupported format {fmt}")
    buf = io.BytesIO()
    Image.fromarray(q, mode="L").save(buf, format=fmt)
    return buf.getvalue()


def _bilinear_axis(n_src: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Half-pixel-center alignment; clamped to the valid sample range.
    pos = (np.arange(n_out) + 0.5) * (n_src / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_src - 1.0)
    lo = np.floor(pos).astype(np.intp)
    lo = np.minimum(lo, n_src - 2) if n_src > 1 else np.zeros(n_out, dtype=np.intp)
    frac = pos - lo if n_src > 1 else np.zeros(n_out)
    return lo, lo + (1 if n_src > 1 else 0), frac


def resize_bilinear(src: Raster, out_w: int, out_h: int) -> Raster:
    """Bilinear resize with half-pixel-center alignment."""
    if out_w < 1 or out_h < 1:
        raise InvalidArgument("target dimensions must be >= 1")
    a = src.data
    x0, x1, fx = _bilinear_axis(src.width, out_w)
    y0, y1, fy = _bilinear_axis(src.height, out_h)
    top = a[y0][:, x0] * (1 - fx) + a[y0][:, x1] * fx
    bot = a[y1][:, x0] * (1 - fx) + a[y1][:, x1] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return Raster(np.clip(out, 0.0, 255.0))


def psnr(ref: Raster, dist: Raster) -> float:
    """10*log10(255^2 / MSE); +inf for identical images."""
    if ref.data.shape != dist.data.shape:
        raise ShapeError(f"shape mismatch {ref.data.shape} vs {dist.data.shape}")
    mse = float(np.mean((ref.data - dist.data) ** 2))
    if mse == 0.0:
        return PSNR_INF
    return 10.0 * np.log10(255.0 ** 2 / mse)
