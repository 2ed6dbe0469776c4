"""Dataset discovery, stratified splitting, and a synthetic image corpus.

A dataset root holds one directory per class (benign / malignant / normal,
matched case-insensitively). The synthetic generator produces three visually
distinct texture families so the full pipeline can be exercised and verified
without any external data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import imaging

log = logging.getLogger(__name__)

CLASS_NAMES = ("benign", "malignant", "normal")

_RASTER_SUFFIXES = frozenset({".png", ".bmp", ".tif", ".tiff", ".pgm"})

SYNTH_SIDE = 128


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    paths: tuple[Path, ...]
    labels: np.ndarray  # int64, aligned with paths

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(int((self.labels == c).sum()) for c in range(len(CLASS_NAMES)))

    def __len__(self) -> int:
        return len(self.paths)


class SplitIndices(NamedTuple):
    train: np.ndarray
    test: np.ndarray


def scan_dataset(root: str | Path) -> DatasetManifest:
    """Enumerate class directories into a deterministic manifest.

    Class directories are matched case-insensitively; files are sorted
    lexicographically by name. A present-but-empty class only warns, so the
    split step can give the actionable error.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a directory")
    dirs_by_name = {d.name.lower(): d for d in root.iterdir() if d.is_dir()}
    paths: list[Path] = []
    labels: list[int] = []
    for cls, name in enumerate(CLASS_NAMES):
        class_dir = dirs_by_name.get(name)
        if class_dir is None:
            raise ValueError(f"dataset root {root} has no '{name}' directory")
        files = sorted(
            (
                p
                for p in class_dir.iterdir()
                if p.is_file() and p.suffix.lower() in _RASTER_SUFFIXES
            ),
            key=lambda p: p.name,
        )
        if not files:
            log.warning("class directory %s contains no image files", class_dir)
        paths.extend(files)
        labels.extend([cls] * len(files))
    return DatasetManifest(
        root=root, paths=tuple(paths), labels=np.asarray(labels, dtype=np.int64)
    )


def split_train_test(labels: np.ndarray, ratio: float, seed: int) -> SplitIndices:
    """Stratified split: shuffle each class, take floor(ratio * n_c) for
    training, the rest for test. Index arrays concatenate in class order."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie strictly between 0 and 1, got {ratio}")
    labels = np.asarray(labels)
    rng = np.random.default_rng([seed % (2**63), 17])
    train_parts: list[np.ndarray] = []
    test_parts: list[np.ndarray] = []
    for c in range(len(CLASS_NAMES)):
        idx = np.nonzero(labels == c)[0]
        n_c = idx.size
        if n_c < 2:
            raise ValueError(
                f"class {CLASS_NAMES[c]!r} has {n_c} sample(s); "
                "need at least 2 to split"
            )
        k = int(math.floor(ratio * n_c))
        if k < 1 or k >= n_c:
            raise ValueError(
                f"ratio {ratio} leaves class {CLASS_NAMES[c]!r} without both "
                "train and test samples"
            )
        perm = rng.permutation(idx)
        train_parts.append(perm[:k])
        test_parts.append(perm[k:])
    return SplitIndices(
        train=np.concatenate(train_parts), test=np.concatenate(test_parts)
    )


def _add_disks(
    img: np.ndarray,
    rng: np.random.Generator,
    count: int,
    amp_lo: float,
    amp_hi: float,
    r_lo: float,
    r_hi: float,
    grid: tuple[np.ndarray, np.ndarray],
) -> None:
    """Stamp ``count`` hard-edged disks with random signs in place.

    Centers keep a minimum separation so disks never stack: stacked disks
    would double the local contrast and change which edge-threshold levels
    the boundary crosses.
    """
    yy, xx = grid
    side = img.shape[0]
    min_sep = 11.0
    placed: list[tuple[float, float]] = []
    for _ in range(count):
        cx = cy = 0.0
        for _attempt in range(64):
            cx = rng.uniform(8.0, side - 8.0)
            cy = rng.uniform(8.0, side - 8.0)
            if all(
                (cx - px) ** 2 + (cy - py) ** 2 >= min_sep * min_sep
                for px, py in placed
            ):
                break
        placed.append((cx, cy))
        r = rng.uniform(r_lo, r_hi)
        amp = rng.uniform(amp_lo, amp_hi) * (1.0 if rng.random() < 0.5 else -1.0)
        img[(xx - cx) ** 2 + (yy - cy) ** 2 <= r * r] += amp


def _synth_image(cls: int, rng: np.random.Generator) -> np.ndarray:
    """One synthetic texture.

    The three families differ in background shading and in the contrast of
    their hard-edged disk lesions, so every stage of the pipeline carries
    class signal: disk boundaries of different strengths light up different
    edge-threshold levels, while the smooth class produces none at all.
    Backgrounds stay close to mid-gray, keeping feature magnitudes in a range
    the default training settings handle without any input scaler.
    """
    side = SYNTH_SIDE
    grid = np.mgrid[0:side, 0:side].astype(np.float64)
    yy, xx = grid
    if cls == 0:
        # Smooth class: two broad opposite-signed blobs, no sharp detail, so
        # every edge map stays empty.
        img = np.full((side, side), 121.0)
        for sign in (1.0, -1.0):
            cx = rng.uniform(25.0, side - 25.0)
            cy = rng.uniform(25.0, side - 25.0)
            sig = rng.uniform(14.0, 20.0)
            amp = sign * rng.uniform(6.0, 10.0)
            img += amp * np.exp(
                -((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sig * sig)
            )
    elif cls == 1:
        # High-contrast class: many strong disks whose boundaries survive
        # every edge-threshold level.
        img = np.full((side, side), 135.0)
        count = int(rng.integers(13, 18))
        _add_disks(img, rng, count, 108.0, 122.0, 1.5, 2.5, grid)
    elif cls == 2:
        # Shaded class: a gentle dark-to-bright ramp (too gradual to register
        # as an edge) plus a few medium disks that only the most sensitive
        # threshold level picks up.
        x0 = rng.uniform(52.0, 76.0)
        t = np.clip((xx - x0) / 24.0 + 0.5, 0.0, 1.0)
        img = 121.0 + 14.0 * (t * t * (3.0 - 2.0 * t))
        count = int(rng.integers(8, 10))
        _add_disks(img, rng, count, 88.0, 93.0, 1.9, 2.6, grid)
    else:
        raise ValueError(f"unknown class index {cls}")
    return np.clip(imaging.round_half_up(img), 0.0, 255.0).astype(np.uint8)


def synth_generate(out_dir: str | Path, n_per_class: int, seed: int) -> DatasetManifest:
    """Write ``n_per_class`` PNGs per class under ``out_dir`` and scan them.

    Every image gets its own generator stream keyed by (seed, class, index),
    so regeneration is reproducible image by image.
    """
    if n_per_class < 1:
        raise ValueError(f"n_per_class must be >= 1, got {n_per_class}")
    out_dir = Path(out_dir)
    for cls, name in enumerate(CLASS_NAMES):
        class_dir = out_dir / name
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(n_per_class):
            rng = np.random.default_rng([seed % (2**63), cls, i])
            img = _synth_image(cls, rng)
            imaging.save_grayscale(img, class_dir / f"{name}_{i:04d}.png")
    return scan_dataset(out_dir)
