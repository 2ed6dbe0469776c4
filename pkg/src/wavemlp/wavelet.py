"""Haar wavelet decomposition and the 64-value texture feature vector.

A normalized 128x128 image yields four variants (the image itself plus three
binary edge maps at increasing threshold levels). Each variant is decomposed
into four subbands, and each subband is summarized by four statistics, giving
4 x 4 x 4 = 64 features in a fixed, documented order.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import _kernels, imaging

IMAGE_SIDE = 128

VARIANT_NAMES = ("raw", "canny_50_150", "canny_100_200", "canny_150_250")
SUBBAND_NAMES = ("cA", "cH", "cV", "cD")
STAT_NAMES = ("mean", "std", "energy", "entropy")

FEATURE_COUNT = len(VARIANT_NAMES) * len(SUBBAND_NAMES) * len(STAT_NAMES)

ENTROPY_BINS = 256


class WaveletDecomposition(NamedTuple):
    """Single-level subbands: approximation plus three detail orientations."""

    cA: np.ndarray
    cH: np.ndarray
    cV: np.ndarray
    cD: np.ndarray


class SubbandStats(NamedTuple):
    mean: float
    std: float
    energy: float
    entropy: float


def _require_even_2d(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {x.shape}")
    if x.shape[0] % 2 or x.shape[1] % 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise ValueError(f"both sides must be even and nonzero, got {x.shape}")
    return x


def haar_dwt2(x: np.ndarray) -> WaveletDecomposition:
    """Single-level 2-D Haar transform (orthonormal scaling).

    Each 2x2 block [[a, b], [c, d]] contributes
    cA=(a+b+c+d)/2, cH=(a+b-c-d)/2, cV=(a-b+c-d)/2, cD=(a-b-c+d)/2,
    which preserves total energy exactly.
    """
    x = _require_even_2d(x)
    return WaveletDecomposition(*_kernels.haar_dwt2(x))


def haar_idwt2(dec: WaveletDecomposition) -> np.ndarray:
    """Reconstruct the original array from its four subbands."""
    ca, ch, cv, cd = (np.asarray(b, dtype=np.float64) for b in dec)
    if not (ca.shape == ch.shape == cv.shape == cd.shape) or ca.ndim != 2:
        raise ValueError("all four subbands must share one 2-D shape")
    return _kernels.haar_idwt2(ca, ch, cv, cd)


def subband_stats(band: np.ndarray) -> SubbandStats:
    """Summary statistics of one subband.

    Entropy is Shannon entropy (bits) of a 256-bin equal-width histogram over
    the band's own value range; a constant band has entropy 0. Std is the
    population standard deviation; energy is the sum of squared coefficients.
    """
    v = np.asarray(band, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("subband is empty")
    mean = float(v.mean())
    std = float(v.std())
    energy = float(np.dot(v, v))
    lo = float(v.min())
    hi = float(v.max())
    if lo == hi:
        entropy = 0.0
    else:
        counts, _ = np.histogram(v, bins=ENTROPY_BINS, range=(lo, hi))
        p = counts[counts > 0] / v.size
        entropy = float(-np.sum(p * np.log2(p)))
    return SubbandStats(mean, std, energy, entropy)


def feature_names() -> list[str]:
    """Names of the 64 features, in vector order."""
    return [
        f"{variant}_{band}_{stat}"
        for variant in VARIANT_NAMES
        for band in SUBBAND_NAMES
        for stat in STAT_NAMES
    ]


def feature_vector(img_norm: np.ndarray) -> np.ndarray:
    """64-value feature vector of a normalized 128x128 image.

    Order: for each variant (raw image, then the three edge maps at
    thresholds 50/150, 100/200, 150/250), for each subband (cA, cH, cV, cD),
    the statistics (mean, std, energy, entropy).
    """
    img_norm = np.asarray(img_norm, dtype=np.float64)
    if img_norm.shape != (IMAGE_SIDE, IMAGE_SIDE):
        raise ValueError(
            f"expected a {IMAGE_SIDE}x{IMAGE_SIDE} normalized image, "
            f"got shape {img_norm.shape}"
        )
    gray = imaging.denormalize(img_norm)
    variants: list[np.ndarray] = [img_norm]
    variants.extend(m.astype(np.float64) for m in imaging.canny_multi(gray))

    values: list[float] = []
    for variant in variants:
        dec = haar_dwt2(variant)
        for band in dec:
            values.extend(subband_stats(band))
    return np.asarray(values, dtype=np.float64)


def export_features_csv(
    path: str | Path, features: np.ndarray, labels: np.ndarray
) -> None:
    """Write a feature matrix with labels to CSV (one row per sample)."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if features.ndim != 2 or features.shape[1] != FEATURE_COUNT:
        raise ValueError(f"expected an (n, {FEATURE_COUNT}) matrix, got {features.shape}")
    if features.shape[0] != labels.shape[0]:
        raise ValueError("features and labels disagree on the sample count")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", *feature_names()])
        for row, label in zip(features, labels):
            writer.writerow([int(label), *(f"{v:.10g}" for v in row)])
