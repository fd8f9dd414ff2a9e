"""Deterministic substitute CNN backbones.

The original pretrained VGG-F/M/S weights are not available offline, so each
architecture name maps to a fixed-seed random backbone with the same output
arity: a 4096-dim penultimate activation vector and 1000 class logits.  The
substitution is recorded in the source tag of every emitted feature file.

Convolution filters are made zero-mean (no DC response), so the network's
response energy tracks the image's structural/high-frequency content; codec
degradation therefore shrinks the logits toward a uniform softmax, which is
the behaviour the downstream confidence probe relies on.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InvalidArgument

INPUT_SIZE = 224
FC1_DIM = 4096
N_CLASSES = 1000

# per-architecture config: weight seed, conv1 stride, first pooling window
_ARCHS = {
    "vgg-f": {"seed": 11, "stride1": 4, "pool1": 2},
    "vgg-m": {"seed": 23, "stride1": 2, "pool1": 3},
    "vgg-s": {"seed": 37, "stride1": 2, "pool1": 2},
}

_CONV1_K, _CONV1_CH = 7, 16
_CONV2_K, _CONV2_CH = 5, 32
_CONV2_STRIDE = 2
_POOL2 = 2
# gains keep pristine-image logit spread at a few units so the softmax is
# neither saturated nor uniform
_FC1_GAIN = 2.0
_LOGIT_GAIN = 6.0


def architecture_names():
    return tuple(_ARCHS)


def _check_arch(arch: str) -> str:
    key = arch.lower()
    if key not in _ARCHS:
        raise InvalidArgument(
            f"unknown architecture {arch!r}; expected one of {sorted(_ARCHS)}")
    return key


def _conv_out(n: int, k: int, stride: int) -> int:
    return (n - k) // stride + 1


def _zero_mean_filters(rng, k: int, c_in: int, c_out: int) -> np.ndarray:
    w = rng.standard_normal((k, k, c_in, c_out))
    w -= w.mean(axis=(0, 1, 2), keepdims=True)
    w /= np.sqrt(k * k * c_in)
    return w.astype(np.float32)


@lru_cache(maxsize=None)
def load_weights(arch: str) -> dict:
    """Generate (and cache) the fixed-seed weight set for one architecture."""
    key = _check_arch(arch)
    cfg = _ARCHS[key]
    rng = np.random.default_rng(cfg["seed"])
    n = _conv_out(INPUT_SIZE, _CONV1_K, cfg["stride1"]) // cfg["pool1"]
    n = _conv_out(n, _CONV2_K, _CONV2_STRIDE) // _POOL2
    flat = n * n * _CONV2_CH
    return {
        "conv1": _zero_mean_filters(rng, _CONV1_K, 3, _CONV1_CH),
        "conv2": _zero_mean_filters(rng, _CONV2_K, _CONV1_CH, _CONV2_CH),
        "fc1": (rng.standard_normal((flat, FC1_DIM))
                * (_FC1_GAIN / np.sqrt(flat))).astype(np.float32),
        "fc2": (rng.standard_normal((FC1_DIM, N_CLASSES))
                * (_LOGIT_GAIN / np.sqrt(FC1_DIM))).astype(np.float32),
        "stride1": cfg["stride1"],
        "pool1": cfg["pool1"],
    }


def _conv(x: np.ndarray, w: np.ndarray, stride: int) -> np.ndarray:
    """Valid cross-correlation; x (H, W, Cin), w (k, k, Cin, Cout)."""
    k = w.shape[0]
    win = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(0, 1))
    win = win[::stride, ::stride]  # (Ho, Wo, Cin, k, k)
    ho, wo = win.shape[:2]
    cols = win.transpose(0, 1, 3, 4, 2).reshape(ho * wo, k * k * x.shape[2])
    out = cols @ w.reshape(k * k * x.shape[2], w.shape[3])
    return out.reshape(ho, wo, w.shape[3])


def _maxpool(x: np.ndarray, p: int) -> np.ndarray:
    h, w, c = x.shape
    x = x[:h - h % p, :w - w % p]
    return x.reshape(h // p, p, w // p, p, c).max(axis=(1, 3))


def forward(arch: str, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run the backbone on a normalized (224, 224, 3) float32 input.

    Returns (fc1, logits): the 4096-dim rectified penultimate activations and
    the 1000 raw class logits, both float32.
    """
    weights = load_weights(arch)
    if x.shape != (INPUT_SIZE, INPUT_SIZE, 3):
        raise InvalidArgument(f"expected ({INPUT_SIZE}, {INPUT_SIZE}, 3) input, "
                              f"got {x.shape}")
    a = np.maximum(_conv(x.astype(np.float32), weights["conv1"],
                         weights["stride1"]), 0.0)
    a = _maxpool(a, weights["pool1"])
    a = np.maximum(_conv(a, weights["conv2"], _CONV2_STRIDE), 0.0)
    a = _maxpool(a, _POOL2)
    flat = a.reshape(-1)
    fc1 = np.maximum(flat @ weights["fc1"], np.float32(0.0))
    logits = fc1 @ weights["fc2"]
    return fc1, logits


def softmax_confidence(logits: np.ndarray) -> float:
    """Maximum softmax probability (shift-invariant)."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    return float(e.max() / e.sum())
