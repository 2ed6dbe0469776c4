"""Grayscale image IO, geometry, and multi-stage edge detection.

The edge detector is the classic five-stage chain: Gaussian smoothing, Sobel
gradients, non-maximum suppression along the quantized gradient direction,
double thresholding, and hysteresis tracking. It runs at three fixed
sensitivity levels (``CANNY_THRESHOLDS``) to produce the binary texture maps
the feature extractor consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from PIL import Image

from . import _kernels

GRAY_WEIGHTS = (0.299, 0.587, 0.114)
GAUSS_SIZE = 5
GAUSS_SIGMA = 1.4

# Formats whose decompression does not reproduce the encoded pixels exactly.
_LOSSY_FORMATS = frozenset({"JPEG", "JPEG2000", "WEBP"})

_GAUSS_KERNEL = _kernels.gaussian_kernel(GAUSS_SIZE, GAUSS_SIGMA)


@dataclass(frozen=True)
class ThresholdPair:
    """Double-threshold levels for edge classification."""

    low: float
    high: float

    def __post_init__(self) -> None:
        if not 0 <= self.low < self.high:
            raise ValueError(
                f"thresholds must satisfy 0 <= low < high, got ({self.low}, {self.high})"
            )


CANNY_THRESHOLDS: tuple[ThresholdPair, ...] = (
    ThresholdPair(50, 150),
    ThresholdPair(100, 200),
    ThresholdPair(150, 250),
)


class CannyStages(NamedTuple):
    """Intermediate products of one edge-detection run."""

    blurred: np.ndarray
    magnitude: np.ndarray
    suppressed: np.ndarray
    strong: np.ndarray
    weak: np.ndarray
    edges: np.ndarray


def _require_u8_image(img: np.ndarray, min_side: int = 1) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale array, got shape {img.shape}")
    if img.dtype != np.uint8:
        raise ValueError(f"expected dtype uint8, got {img.dtype}")
    if img.shape[0] < min_side or img.shape[1] < min_side:
        raise ValueError(
            f"image {img.shape} is smaller than the required {min_side}x{min_side}"
        )
    return img


def round_half_up(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer with halves going up (0.5 -> 1, 1.5 -> 2)."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def load_grayscale(path: str | Path) -> np.ndarray:
    """Load an image file as a uint8 grayscale array.

    Single-channel images are taken as-is; RGB is reduced with the standard
    luminance weights (rounded half-up). Lossy formats and exotic modes are
    rejected so the pipeline stays byte-reproducible.
    """
    path = Path(path)
    with Image.open(path) as im:
        fmt = (im.format or "").upper()
        if fmt in _LOSSY_FORMATS:
            raise ValueError(
                f"{path.name}: lossy format {fmt} is not supported; "
                "re-encode as PNG/BMP/TIFF"
            )
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)
        elif im.mode == "RGB":
            rgb = np.asarray(im, dtype=np.float64)
            lum = (
                GRAY_WEIGHTS[0] * rgb[..., 0]
                + GRAY_WEIGHTS[1] * rgb[..., 1]
                + GRAY_WEIGHTS[2] * rgb[..., 2]
            )
            arr = np.clip(round_half_up(lum), 0.0, 255.0).astype(np.uint8)
        else:
            raise ValueError(
                f"{path.name}: unsupported image mode {im.mode!r} (need L or RGB)"
            )
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{path.name}: image has a zero dimension {arr.shape}")
    return arr


def save_grayscale(img: np.ndarray, path: str | Path) -> None:
    """Write a uint8 grayscale array as a PNG (byte-deterministic)."""
    img = _require_u8_image(img)
    Image.fromarray(img, mode="L").save(Path(path), format="PNG")


def resize_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Resize with bilinear interpolation on pixel centers."""
    img = _require_u8_image(img)
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be positive, got {out_w}x{out_h}")
    if (out_h, out_w) == img.shape:
        return img.copy()
    return _kernels.resize_bilinear_u8(img, out_h, out_w)


def normalize(img: np.ndarray) -> np.ndarray:
    """Map uint8 pixels to float64 in [-1, 1]."""
    img = _require_u8_image(img)
    return (img.astype(np.float64) / 255.0 - 0.5) / 0.5


def denormalize(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`normalize`, rounding half-up back to uint8."""
    v = np.asarray(v, dtype=np.float64)
    pixels = round_half_up((v * 0.5 + 0.5) * 255.0)
    return np.clip(pixels, 0.0, 255.0).astype(np.uint8)


def gaussian_blur(img: np.ndarray) -> np.ndarray:
    """Smooth with the fixed 5x5 Gaussian (sigma 1.4), edges replicated."""
    img = _require_u8_image(img, min_side=GAUSS_SIZE)
    return _kernels.gaussian_blur_u8(img, _GAUSS_KERNEL)


def gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sobel gradient components (gx, gy) as int32."""
    img = _require_u8_image(img, min_side=3)
    return _kernels.sobel_gradients(img)


def double_threshold(
    suppressed: np.ndarray, thresholds: ThresholdPair
) -> tuple[np.ndarray, np.ndarray]:
    """Split suppressed magnitudes into strong and weak edge candidates.

    Strong pixels meet the high threshold; weak pixels sit in [low, high).
    """
    strong = suppressed >= thresholds.high
    weak = (suppressed >= thresholds.low) & ~strong
    return strong, weak


def canny_stages(img: np.ndarray, thresholds: ThresholdPair) -> CannyStages:
    """Run the full edge-detection chain and keep every intermediate stage."""
    img = _require_u8_image(img, min_side=GAUSS_SIZE)
    blurred = _kernels.gaussian_blur_u8(img, _GAUSS_KERNEL)
    gx, gy = _kernels.sobel_gradients(blurred)
    mag = _kernels.gradient_magnitude(gx, gy)
    bins = _kernels.gradient_direction(gx, gy)
    suppressed = _kernels.nonmax_suppress(mag, bins)
    strong, weak = double_threshold(suppressed, thresholds)
    edges = _kernels.hysteresis(
        strong.astype(np.uint8), weak.astype(np.uint8)
    ).astype(bool)
    return CannyStages(blurred, mag, suppressed, strong, weak, edges)


def _to_u8_scaled(x: np.ndarray) -> np.ndarray:
    """Scale a non-negative float array onto 0..255 for debug snapshots."""
    peak = float(x.max()) if x.size else 0.0
    if peak <= 0.0:
        return np.zeros(x.shape, dtype=np.uint8)
    scaled = round_half_up(x * (255.0 / peak))
    return np.clip(scaled, 0.0, 255.0).astype(np.uint8)


def canny(
    img: np.ndarray,
    thresholds: ThresholdPair,
    debug_dir: str | Path | None = None,
    prefix: str = "canny",
) -> np.ndarray:
    """Binary edge map of ``img`` for one threshold pair.

    With ``debug_dir`` set, PNG snapshots of the blurred image, gradient
    magnitude, suppressed magnitude, and final edges are written there.
    """
    stages = canny_stages(img, thresholds)
    if debug_dir is not None:
        debug_dir = Path(debug_dir)
        debug_dir.mkdir(parents=True, exist_ok=True)
        save_grayscale(stages.blurred, debug_dir / f"{prefix}_blur.png")
        save_grayscale(_to_u8_scaled(stages.magnitude), debug_dir / f"{prefix}_mag.png")
        save_grayscale(
            _to_u8_scaled(stages.suppressed), debug_dir / f"{prefix}_nms.png"
        )
        save_grayscale(
            stages.edges.astype(np.uint8) * 255, debug_dir / f"{prefix}_edges.png"
        )
    return stages.edges


def canny_multi(
    img: np.ndarray,
    thresholds: Sequence[ThresholdPair] = CANNY_THRESHOLDS,
    debug_dir: str | Path | None = None,
) -> list[np.ndarray]:
    """Edge maps for every threshold pair, in the order given."""
    maps = []
    for t in thresholds:
        prefix = f"canny_{t.low:g}_{t.high:g}"
        maps.append(canny(img, t, debug_dir=debug_dir, prefix=prefix))
    return maps
