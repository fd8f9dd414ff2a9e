"""Spherical geometry: viewport sampling, gnomonic rendering, spherical PSNRs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AspectError, InvalidArgument, ShapeError
from .raster import PSNR_INF, Raster

SUPPORTED_VIEWPORT_COUNTS = (6, 20, 80)
DEFAULT_FOV = math.pi / 2
DEFAULT_VIEWPORT_SIZE = 256


@dataclass(frozen=True)
class SphereDirection:
    lon: float  # radians in [-pi, pi)
    lat: float  # radians in [-pi/2, pi/2]

    def __post_init__(self):
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise InvalidArgument("non-finite direction")
        if not (-math.pi <= self.lon < math.pi) or abs(self.lat) > math.pi / 2:
            raise InvalidArgument(f"direction out of range: lon={self.lon}, lat={self.lat}")

    def unit(self) -> np.ndarray:
        cl = math.cos(self.lat)
        return np.array([cl * math.cos(self.lon), cl * math.sin(self.lon), math.sin(self.lat)])


@dataclass(frozen=True)
class ViewportSpec:
    center: SphereDirection
    fov: float = DEFAULT_FOV
    size: int = DEFAULT_VIEWPORT_SIZE

    def __post_init__(self):
        if not (0.0 < self.fov < math.pi):
            raise InvalidArgument("fov must lie in (0, pi)")
        if self.size < 8:
            raise InvalidArgument("viewport size must be >= 8")


def _unit_to_lonlat(v: np.ndarray) -> SphereDirection:
    v = v / np.linalg.norm(v)
    lon = math.atan2(v[1], v[0])
    if lon >= math.pi:
        lon -= 2 * math.pi
    lat = math.asin(max(-1.0, min(1.0, v[2])))
    return SphereDirection(lon, lat)


def _icosahedron_faces() -> np.ndarray:
    """Unit-normalized centers of the 20 icosahedron faces."""
    phi = (1 + math.sqrt(5)) / 2
    verts = []
    for a in (-1.0, 1.0):
        for b in (-phi, phi):
            verts += [(0, a, b), (a, b, 0), (b, 0, a)]
    verts = np.array(verts)
    verts /= np.linalg.norm(verts[0])
    # faces = triples of mutually nearest vertices (edge length 2)
    faces = []
    n = len(verts)
    edge2 = 4.0 / (1 + phi * phi)  # squared edge length after normalization
    for i in range(n):
        for j in range(i + 1, n):
            if abs(np.sum((verts[i] - verts[j]) ** 2) - edge2) > 1e-9:
                continue
            for k in range(j + 1, n):
                if (abs(np.sum((verts[i] - verts[k]) ** 2) - edge2) < 1e-9
                        and abs(np.sum((verts[j] - verts[k]) ** 2) - edge2) < 1e-9):
                    faces.append((i, j, k))
    assert len(faces) == 20
    return verts[np.array(faces)]  # (20, 3, 3)


def _subdivide(faces: np.ndarray) -> np.ndarray:
    """Split each spherical triangle into 4 via edge midpoints."""
    out = []
    for a, b, c in faces:
        ab = (a + b) / np.linalg.norm(a + b)
        bc = (b + c) / np.linalg.norm(b + c)
        ca = (c + a) / np.linalg.norm(c + a)
        out += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
    return np.array(out)


def sample_viewports(n_viewports: int) -> list[ViewportSpec]:
    """Deterministic polyhedral sampling pattern (6, 20, or 80 viewports)."""
    if n_viewports not in SUPPORTED_VIEWPORT_COUNTS:
        raise InvalidArgument(f"unsupported viewport count {n_viewports}; use one of {SUPPORTED_VIEWPORT_COUNTS}")
    if n_viewports == 6:
        centers = [
            SphereDirection(0.0, 0.0),
            SphereDirection(math.pi / 2, 0.0),
            SphereDirection(-math.pi, 0.0),
            SphereDirection(-math.pi / 2, 0.0),
            SphereDirection(0.0, math.pi / 2),
            SphereDirection(0.0, -math.pi / 2),
        ]
    else:
        faces = _icosahedron_faces()
        if n_viewports == 80:
            faces = _subdivide(faces)
        mids = faces.mean(axis=1)
        dirs = [_unit_to_lonlat(m) for m in mids]
        centers = sorted(dirs, key=lambda d: (round(d.lat, 9), round(d.lon, 9)))
    return [ViewportSpec(c) for c in centers]


def _require_equirect(r: Raster):
    if r.width != 2 * r.height:
        raise AspectError(f"expected 2:1 equirectangular, got {r.width}x{r.height}")


def sample_equirect(omni: Raster, lon: np.ndarray, lat: np.ndarray) -> np.ndarray:
    """Bilinear sample at (lon, lat); longitude wraps, latitude clamps."""
    h, w = omni.height, omni.width
    u = (lon + math.pi) / (2 * math.pi) * w - 0.5
    v = (math.pi / 2 - lat) / math.pi * h - 0.5
    u = np.mod(u, w)
    v = np.clip(v, 0.0, h - 1.0)
    u0 = np.floor(u).astype(np.intp)
    v0 = np.floor(v).astype(np.intp)
    fu, fv = u - u0, v - v0
    u0 = np.mod(u0, w)
    u1 = np.mod(u0 + 1, w)
    v1 = np.minimum(v0 + 1, h - 1)
    a = omni.data
    top = a[v0, u0] * (1 - fu) + a[v0, u1] * fu
    bot = a[v1, u0] * (1 - fu) + a[v1, u1] * fu
    return top * (1 - fv) + bot * fv


def viewport_rays(spec: ViewportSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel (lon, lat) arrays of the gnomonic projection grid."""
    s = spec.size
    half = math.tan(spec.fov / 2)
    coords = ((np.arange(s) + 0.5) / s * 2 - 1) * half
    xs, ys = np.meshgrid(coords, coords)
    # camera frame: forward +x, right +y, down +z (before rotation)
    d = np.stack([np.ones_like(xs), xs, -ys], axis=-1)
    cl, sl = math.cos(spec.center.lon), math.sin(spec.center.lon)
    cp, sp = math.cos(spec.center.lat), math.sin(spec.center.lat)
    # pitch about y, then yaw about z
    rot_pitch = np.array([[cp, 0, -sp], [0, 1, 0], [sp, 0, cp]])
    rot_yaw = np.array([[cl, -sl, 0], [sl, cl, 0], [0, 0, 1]])
    d = d @ (rot_yaw @ rot_pitch).T
    norm = np.linalg.norm(d, axis=-1)
    lon = np.arctan2(d[..., 1], d[..., 0])
    lat = np.arcsin(np.clip(d[..., 2] / norm, -1.0, 1.0))
    return lon, lat


def render_viewport(omni: Raster, spec: ViewportSpec) -> Raster:
    """Gnomonic (rectilinear) projection of the equirectangular image."""
    _require_equirect(omni)
    lon, lat = viewport_rays(spec)
    return Raster(sample_equirect(omni, lon, lat))


def ws_psnr_weights(height: int) -> np.ndarray:
    """Per-row cos(latitude) weights, normalized to sum 1."""
    lat = math.pi / 2 - (np.arange(height) + 0.5) / height * math.pi
    w = np.cos(lat)
    return w / w.sum()


def ws_psnr(ref: Raster, dist: Raster) -> float:
    """Latitude-weighted PSNR on the equirectangular domain."""
    if ref.data.shape != dist.data.shape:
        raise ShapeError(f"shape mismatch {ref.data.shape} vs {dist.data.shape}")
    _require_equirect(ref)
    w = ws_psnr_weights(ref.height)
    row_mse = np.mean((ref.data - dist.data) ** 2, axis=1)
    wmse = float(np.sum(w * row_mse))
    if wmse == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(255.0 ** 2 / wmse)


def fibonacci_sphere(n: int) -> tuple[np.ndarray, np.ndarray]:
    """(lon, lat) of an n-point Fibonacci lattice on the sphere."""
    golden = (1 + math.sqrt(5)) / 2
    i = np.arange(n)
    z = 1 - (2 * i + 1) / n
    lat = np.arcsin(z)
    lon = np.mod(2 * math.pi * i / golden + math.pi, 2 * math.pi) - math.pi
    return lon, lat


def s_psnr(ref: Raster, dist: Raster, n_points: int = 100_000) -> float:
    """PSNR over a near-uniform set of sphere sample points."""
    if ref.data.shape != dist.data.shape:
        raise ShapeError(f"shape mismatch {ref.data.shape} vs {dist.data.shape}")
    if n_points < 100:
        raise InvalidArgument("n_points must be >= 100")
    lon, lat = fibonacci_sphere(n_points)
    a = sample_equirect(ref, lon, lat)
    b = sample_equirect(dist, lon, lat)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(255.0 ** 2 / mse)


def _cpp_grid(height: int, width: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse Craster parabolic mapping for a width x height target grid.

    Returns (lon, lat, valid) with lon/lat defined where valid.
    """
    # forward: x = sqrt(3/pi) * lon * (2*cos(2*lat/3) - 1), y = sqrt(3*pi) * sin(lat/3)
    xmax = math.sqrt(3 / math.pi) * math.pi
    ymax = math.sqrt(3 * math.pi) * 0.5
    xs = ((np.arange(width) + 0.5) / width * 2 - 1) * xmax
    ys = (1 - (np.arange(height) + 0.5) / height * 2) * ymax
    x, y = np.meshgrid(xs, ys)
    lat = 3 * np.arcsin(np.clip(y / math.sqrt(3 * math.pi), -1.0, 1.0))
    denom = 2 * np.cos(2 * lat / 3) - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        lon = x / (math.sqrt(3 / math.pi) * denom)
    valid = (np.abs(lat) <= math.pi / 2 + 1e-12) & np.isfinite(lon) & (np.abs(lon) <= math.pi)
    lon = np.where(valid, np.clip(lon, -math.pi, math.pi - 1e-12), 0.0)
    lat = np.clip(lat, -math.pi / 2, math.pi / 2)
    return lon, lat, valid


def cpp_psnr(ref: Raster, dist: Raster) -> float:
    """PSNR after resampling both images to the Craster parabolic projection."""
    if ref.data.shape != dist.data.shape:
        raise ShapeError(f"shape mismatch {ref.data.shape} vs {dist.data.shape}")
    _require_equirect(ref)
    lon, lat, valid = _cpp_grid(ref.height, ref.width)
    a = sample_equirect(ref, lon[valid], lat[valid])
    b = sample_equirect(dist, lon[valid], lat[valid])
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(255.0 ** 2 / mse)
