"""Timing comparison between the compiled and pure numpy kernel backends."""

from __future__ import annotations

import importlib
import time
from dataclasses import dataclass

import numpy as np

from ._kernels import _pure, gaussian_kernel


@dataclass(frozen=True)
class BenchRow:
    kernel: str
    pure_ms: float
    compiled_ms: float | None

    @property
    def speedup(self) -> float | None:
        if self.compiled_ms is None or self.compiled_ms == 0:
            return None
        return self.pure_ms / self.compiled_ms


def _compiled_backend():
    try:
        return importlib.import_module("wavemlp._kernels._core")
    except ImportError:
        return None


def _time_call(fn, *args, repeat: int) -> float:
    fn(*args)  # warm up
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best * 1000.0


def run_benchmark(size: int = 128, repeat: int = 10) -> list[BenchRow]:
    """Time each kernel on a random image at ``size`` x ``size``.

    Reports best-of-``repeat`` per backend; the compiled column is None when
    the extension is unavailable.
    """
    if size < 8:
        raise ValueError("size must be >= 8")
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(size, size), dtype=np.uint8)
    kernel = gaussian_kernel()
    gx, gy = _pure.sobel_gradients(img)
    mag = _pure.gradient_magnitude(gx, gy)
    bins = _pure.gradient_direction(gx, gy)
    sup = _pure.nonmax_suppress(mag, bins)
    strong = (sup >= 150.0).astype(np.uint8)
    weak = ((sup >= 50.0) & (sup < 150.0)).astype(np.uint8)
    fimg = img.astype(np.float64)

    cases = [
        ("gaussian_blur", "gaussian_blur_u8", (img, kernel)),
        ("sobel", "sobel_gradients", (img,)),
        ("magnitude", "gradient_magnitude", (gx, gy)),
        ("direction", "gradient_direction", (gx, gy)),
        ("nonmax_suppress", "nonmax_suppress", (mag, bins)),
        ("hysteresis", "hysteresis", (strong, weak)),
        ("resize_bilinear", "resize_bilinear_u8", (img, size * 2, size * 2)),
        ("haar_dwt2", "haar_dwt2", (fimg,)),
    ]
    compiled = _compiled_backend()
    rows = []
    for label, attr, args in cases:
        pure_ms = _time_call(getattr(_pure, attr), *args, repeat=repeat)
        compiled_ms = (
            _time_call(getattr(compiled, attr), *args, repeat=repeat)
            if compiled is not None
            else None
        )
        rows.append(BenchRow(label, pure_ms, compiled_ms))
    return rows


def format_benchmark(rows: list[BenchRow]) -> str:
    lines = [f"{'kernel':<18} {'pure (ms)':>10} {'compiled (ms)':>14} {'speedup':>8}"]
    for r in rows:
        if r.compiled_ms is None:
            lines.append(f"{r.kernel:<18} {r.pure_ms:>10.3f} {'-':>14} {'-':>8}")
        else:
            lines.append(
                f"{r.kernel:<18} {r.pure_ms:>10.3f} {r.compiled_ms:>14.3f} "
                f"{r.speedup:>7.1f}x"
            )
    return "\n".join(lines)
