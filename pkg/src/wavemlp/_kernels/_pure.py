"""Pure numpy implementations of the image-processing kernels.

These mirror the compiled backend (``wavemlp._kernels._core``) operation for
operation: same arithmetic order, same association, no fused multiply-adds.
Both backends must produce bit-identical outputs; the test suite asserts exact
equality between them.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"

# Quantization boundaries for gradient direction: tan(22.5 deg), tan(67.5 deg).
TAN_22_5 = 0.41421356237309503
TAN_67_5 = 2.414213562373095


def gaussian_kernel(size: int = 5, sigma: float = 1.4) -> np.ndarray:
    """Square Gaussian kernel, normalized so its entries sum to 1."""
    if size < 1 or size % 2 == 0:
        raise ValueError(f"kernel size must be a positive odd integer, got {size}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    xx, yy = np.meshgrid(ax, ax)
    k = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    k /= k.sum()
    # Absorb the residual rounding error into the center tap so the sum is
    # exactly 1 and constant images are preserved bit-for-bit after rounding.
    k[size // 2, size // 2] += 1.0 - k.sum()
    return k


def gaussian_blur_u8(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Convolve a uint8 image with a float kernel, replicating edges.

    Output values are rounded half-up and clipped back to uint8.
    """
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    padded = np.pad(img, ((ph, ph), (pw, pw)), mode="edge").astype(np.float64)
    h, w = img.shape
    acc = np.zeros((h, w), dtype=np.float64)
    # Taps accumulate in row-major order; the compiled backend loops the same
    # way, which keeps per-pixel rounding identical.
    for ky in range(kh):
        for kx in range(kw):
            acc += kernel[ky, kx] * padded[ky : ky + h, kx : kx + w]
    out = np.floor(acc + 0.5)
    return np.clip(out, 0.0, 255.0).astype(np.uint8)


def sobel_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel gradients of a uint8 image with edge replication.

    Returns (gx, gy) as int32 arrays; the arithmetic is exact.
    """
    p = np.pad(img, 1, mode="edge").astype(np.int32)
    gx = (p[:-2, 2:] + 2 * p[1:-1, 2:] + p[2:, 2:]) - (
        p[:-2, :-2] + 2 * p[1:-1, :-2] + p[2:, :-2]
    )
    gy = (p[2:, :-2] + 2 * p[2:, 1:-1] + p[2:, 2:]) - (
        p[:-2, :-2] + 2 * p[:-2, 1:-1] + p[:-2, 2:]
    )
    return gx, gy


def gradient_magnitude(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Euclidean gradient magnitude as float64."""
    s = (gx * gx + gy * gy).astype(np.float64)
    return np.sqrt(s)


def gradient_direction(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Quantize gradient angles to four bins.

    Bin 0 is horizontal (edge normal along x), bin 1 the 45 degree diagonal,
    bin 2 vertical, bin 3 the 135 degree diagonal. Uses tangent-threshold
    comparisons so no transcendental functions are involved.
    """
    ax = np.abs(gx).astype(np.float64)
    ay = np.abs(gy).astype(np.float64)
    bins = np.full(gx.shape, 2, dtype=np.uint8)
    b0 = ay <= ax * TAN_22_5
    diag = ~b0 & (ay < ax * TAN_67_5)
    same_sign = gx.astype(np.int64) * gy.astype(np.int64) > 0
    bins[diag & same_sign] = 1
    bins[diag & ~same_sign] = 3
    bins[b0] = 0
    return bins


def nonmax_suppress(mag: np.ndarray, bins: np.ndarray) -> np.ndarray:
    """Thin ridges: keep a pixel only if its magnitude is >= both neighbors
    along its quantized gradient direction. Out-of-bounds neighbors count 0.
    """
    h, w = mag.shape
    p = np.zeros((h + 2, w + 2), dtype=np.float64)
    p[1:-1, 1:-1] = mag

    # Neighbor pairs per bin, as (dy, dx) offsets into the padded array.
    pairs = {
        0: ((0, -1), (0, 1)),
        1: ((-1, -1), (1, 1)),
        2: ((-1, 0), (1, 0)),
        3: ((-1, 1), (1, -1)),
    }
    out = np.zeros_like(mag)
    for b, ((dy1, dx1), (dy2, dx2)) in pairs.items():
        n1 = p[1 + dy1 : 1 + dy1 + h, 1 + dx1 : 1 + dx1 + w]
        n2 = p[1 + dy2 : 1 + dy2 + h, 1 + dx2 : 1 + dx2 + w]
        keep = (bins == b) & (mag >= n1) & (mag >= n2)
        out[keep] = mag[keep]
    return out


def hysteresis(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    """Grow strong edges through 8-connected chains of weak pixels."""
    h, w = strong.shape
    r = np.zeros((h + 2, w + 2), dtype=bool)
    r[1:-1, 1:-1] = strong
    cand = np.zeros((h + 2, w + 2), dtype=bool)
    cand[1:-1, 1:-1] = weak
    while True:
        neigh = (
            r[:-2, :-2] | r[:-2, 1:-1] | r[:-2, 2:]
            | r[1:-1, :-2] | r[1:-1, 2:]
            | r[2:, :-2] | r[2:, 1:-1] | r[2:, 2:]
        )
        new = neigh & cand[1:-1, 1:-1] & ~r[1:-1, 1:-1]
        if not new.any():
            break
        r[1:-1, 1:-1] |= new
    return r[1:-1, 1:-1].copy()


def resize_bilinear_u8(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a uint8 image with pixel-center alignment.

    Source coordinates are clamped to the image, interpolated values rounded
    half-up.
    """
    in_h, in_w = img.shape
    sy = np.clip((np.arange(out_h, dtype=np.float64) + 0.5) * in_h / out_h - 0.5,
                 0.0, float(in_h - 1))
    sx = np.clip((np.arange(out_w, dtype=np.float64) + 0.5) * in_w / out_w - 0.5,
                 0.0, float(in_w - 1))
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    fy = (sy - y0)[:, None]
    fx = (sx - x0)[None, :]

    p00 = img[y0[:, None], x0[None, :]].astype(np.float64)
    p01 = img[y0[:, None], x1[None, :]].astype(np.float64)
    p10 = img[y1[:, None], x0[None, :]].astype(np.float64)
    p11 = img[y1[:, None], x1[None, :]].astype(np.float64)

    top = (1.0 - fx) * p00 + fx * p01
    bot = (1.0 - fx) * p10 + fx * p11
    v = (1.0 - fy) * top + fy * bot
    out = np.floor(v + 0.5)
    return np.clip(out, 0.0, 255.0).astype(np.uint8)


def haar_dwt2(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Single-level 2D Haar transform of an even-sided float64 array.

    Each 2x2 block [[a, b], [c, d]] maps to approximation and horizontal,
    vertical, diagonal details; the /2 scaling makes the transform orthonormal
    and energy-preserving.
    """
    a = x[0::2, 0::2]
    b = x[0::2, 1::2]
    c = x[1::2, 0::2]
    d = x[1::2, 1::2]
    ca = (a + b + c + d) / 2.0
    ch = (a + b - c - d) / 2.0
    cv = (a - b + c - d) / 2.0
    cd = (a - b - c + d) / 2.0
    return ca, ch, cv, cd


def haar_idwt2(ca: np.ndarray, ch: np.ndarray, cv: np.ndarray,
               cd: np.ndarray) -> np.ndarray:
    """Exact inverse of :func:`haar_dwt2`."""
    hh, hw = ca.shape
    x = np.empty((hh * 2, hw * 2), dtype=np.float64)
    x[0::2, 0::2] = (ca + ch + cv + cd) / 2.0
    x[0::2, 1::2] = (ca + ch - cv - cd) / 2.0
    x[1::2, 0::2] = (ca - ch + cv - cd) / 2.0
    x[1::2, 1::2] = (ca - ch - cv + cd) / 2.0
    return x
