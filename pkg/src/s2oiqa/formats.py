"""Binary feature/model file formats and the dataset manifest."""

from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptFile, InvalidArgument, SchemaError

FEATURE_MAGIC = b"S2FV"
FEATURE_VERSION = 1
KIND_STATISTIC = 1
KIND_SEMANTIC_FC1 = 2
KIND_LOGITS = 3

MODEL_MAGIC = b"S2MD"
MODEL_VERSION = 1

MANIFEST_HEADER = "S2MANIFEST 1"
DISTORTIONS = ("JPEG", "AVC", "HEVC", "OTHER")


def _atomic_write(path, payload: bytes):
    """Write to a temp file in the same directory, then rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(payload)
    os.replace(tmp, path)


# ---------------------------------------------------------------- features

def write_feature_file(path, kind: int, values: np.ndarray, source_tag: str = ""):
    if kind not in (KIND_STATISTIC, KIND_SEMANTIC_FC1, KIND_LOGITS):
        raise InvalidArgument(f"unknown feature kind {kind}")
    vals = np.asarray(values, dtype="<f4").ravel()
    tag = source_tag.encode("utf-8")
    payload = vals.tobytes()
    blob = (FEATURE_MAGIC
            + struct.pack("<HBI", FEATURE_VERSION, kind, len(vals))
            + struct.pack("<H", len(tag)) + tag
            + payload
            + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))
    _atomic_write(path, blob)


def read_feature_file(path) -> tuple[int, np.ndarray, str]:
    """Returns (kind, values, source_tag); validates dims and checksum."""
    data = Path(path).read_bytes()
    if len(data) < 13 or data[:4] != FEATURE_MAGIC:
        raise SchemaError(f"{path}: not a feature file")
    version, kind, dim = struct.unpack_from("<HBI", data, 4)
    if version != FEATURE_VERSION:
        raise SchemaError(f"{path}: unsupported feature-file version {version}")
    if kind not in (KIND_STATISTIC, KIND_SEMANTIC_FC1, KIND_LOGITS):
        raise SchemaError(f"{path}: unknown kind {kind}")
    (taglen,) = struct.unpack_from("<H", data, 11)
    off = 13
    tag = data[off:off + taglen].decode("utf-8")
    off += taglen
    payload = data[off:off + 4 * dim]
    if len(payload) != 4 * dim:
        raise SchemaError(f"{path}: payload shorter than declared dim {dim}")
    off += 4 * dim
    if len(data) < off + 4:
        raise SchemaError(f"{path}: missing checksum")
    (crc,) = struct.unpack_from("<I", data, off)
    if crc != (zlib.crc32(payload) & 0xFFFFFFFF):
        raise CorruptFile(f"{path}: checksum mismatch")
    vals = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if not np.all(np.isfinite(vals)):
        raise SchemaError(f"{path}: non-finite feature values")
    return kind, vals, tag


# ------------------------------------------------------------------ models

def write_model_file(path, model):
    """Persist an SvrModel at full (float64) precision."""
    sv = np.ascontiguousarray(model.support_vectors, dtype="<f8")
    coeffs = np.ascontiguousarray(model.dual_coeffs, dtype="<f8")
    lo = np.ascontiguousarray(model.scaling.lo, dtype="<f8")
    hi = np.ascontiguousarray(model.scaling.hi, dtype="<f8")
    n, dim = sv.shape
    payload = (struct.pack("<II", n, dim)
               + struct.pack("<dddd", model.bias, model.gamma, model.c, model.epsilon)
               + coeffs.tobytes() + lo.tobytes() + hi.tobytes() + sv.tobytes())
    blob = (MODEL_MAGIC + struct.pack("<H", MODEL_VERSION) + payload
            + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))
    _atomic_write(path, blob)


def read_model_file(path):
    from .regress import ScalingParams, SvrModel

    data = Path(path).read_bytes()
    if len(data) < 10 or data[:4] != MODEL_MAGIC:
        raise SchemaError(f"{path}: not a model file")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != MODEL_VERSION:
        raise SchemaError(f"{path}: unsupported model-file version {version}")
    payload = data[6:-4]
    (crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if crc != (zlib.crc32(payload) & 0xFFFFFFFF):
        raise CorruptFile(f"{path}: checksum mismatch")
    n, dim = struct.unpack_from("<II", payload, 0)
    bias, gamma, c, epsilon = struct.unpack_from("<dddd", payload, 8)
    off = 40
    need = 8 * (n + 2 * dim + n * dim)
    if len(payload) != off + need:
        raise SchemaError(f"{path}: payload size mismatch")
    coeffs = np.frombuffer(payload, dtype="<f8", count=n, offset=off).copy()
    off += 8 * n
    lo = np.frombuffer(payload, dtype="<f8", count=dim, offset=off).copy()
    off += 8 * dim
    hi = np.frombuffer(payload, dtype="<f8", count=dim, offset=off).copy()
    off += 8 * dim
    sv = np.frombuffer(payload, dtype="<f8", count=n * dim, offset=off).reshape(n, dim).copy()
    return SvrModel(support_vectors=sv, dual_coeffs=coeffs, bias=bias,
                    gamma=gamma, c=c, epsilon=epsilon,
                    scaling=ScalingParams(lo=lo, hi=hi))


# ---------------------------------------------------------------- manifest

@dataclass(frozen=True)
class ManifestEntry:
    image_path: str
    mos: float
    source_id: str
    distortion: str
    semantic_feature_path: str | None = None
    logits_path: str | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    base_dir: Path = field(default_factory=Path)

    def resolve(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else self.base_dir / q


def parse_manifest(text: str, base_dir=".") -> DatasetManifest:
    """Line-oriented manifest: header, then tab-separated
    image<TAB>mos<TAB>source_id<TAB>distortion[<TAB>semantic[<TAB>logits]]."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != MANIFEST_HEADER:
        raise SchemaError(f"line 1: expected header {MANIFEST_HEADER!r}")
    entries = []
    seen = set()
    for no, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 4 or len(parts) > 6:
            raise SchemaError(f"line {no}: expected 4-6 tab-separated fields, got {len(parts)}")
        image_path, mos_s, source_id, distortion = parts[:4]
        sem = parts[4] if len(parts) >= 5 and parts[4] != "-" else None
        logits = parts[5] if len(parts) == 6 and parts[5] != "-" else None
        try:
            mos = float(mos_s)
        except ValueError:
            raise SchemaError(f"line {no}: bad MOS value {mos_s!r}") from None
        if not (0.0 <= mos <= 100.0):
            raise SchemaError(f"line {no}: MOS {mos} outside [0, 100]")
        if distortion not in DISTORTIONS:
            raise SchemaError(f"line {no}: unknown distortion {distortion!r}")
        if image_path in seen:
            raise SchemaError(f"line {no}: duplicate image path {image_path!r}")
        seen.add(image_path)
        entries.append(ManifestEntry(image_path, mos, source_id, distortion, sem, logits))
    return DatasetManifest(tuple(entries), Path(base_dir))


def load_manifest(path) -> DatasetManifest:
    p = Path(path)
    return parse_manifest(p.read_text(), base_dir=p.parent)


def dump_manifest(manifest: DatasetManifest) -> str:
    lines = [MANIFEST_HEADER]
    for e in manifest.entries:
        parts = [e.image_path, repr(e.mos), e.source_id, e.distortion,
                 e.semantic_feature_path or "-", e.logits_path or "-"]
        lines.append("\t".join(parts))
    return "\n".join(lines) + "\n"
