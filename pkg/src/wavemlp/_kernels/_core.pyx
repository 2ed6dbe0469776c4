# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled image-processing kernels.

Every function mirrors its numpy counterpart in ``_pure`` operation for
operation (same arithmetic order and association, no fused multiply-adds: the
extension is built with -ffp-contract=off) so the two backends produce
bit-identical outputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double TAN_22_5 = 0.41421356237309503
cdef double TAN_67_5 = 2.414213562373095


cdef inline Py_ssize_t _clamp_idx(Py_ssize_t v, Py_ssize_t n) nogil:
    if v < 0:
        return 0
    if v >= n:
        return n - 1
    return v


def gaussian_blur_u8(img, kernel):
    """Convolve a uint8 image with a float kernel, replicating edges."""
    cdef const unsigned char[:, ::1] im = np.ascontiguousarray(img, dtype=np.uint8)
    cdef const double[:, ::1] k = np.ascontiguousarray(kernel, dtype=np.float64)
    cdef Py_ssize_t h = im.shape[0], w = im.shape[1]
    cdef Py_ssize_t kh = k.shape[0], kw = k.shape[1]
    cdef Py_ssize_t ph = kh // 2, pw = kw // 2
    out_arr = np.empty((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, ky, kx, iy, ix
    cdef double acc, v
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for ky in range(kh):
                iy = _clamp_idx(i + ky - ph, h)
                for kx in range(kw):
                    ix = _clamp_idx(j + kx - pw, w)
                    acc = acc + k[ky, kx] * <double> im[iy, ix]
            v = floor(acc + 0.5)
            if v < 0.0:
                v = 0.0
            elif v > 255.0:
                v = 255.0
            out[i, j] = <unsigned char> v
    return out_arr


def sobel_gradients(img):
    """3x3 Sobel gradients (gx, gy) as int32, edge replication."""
    cdef const unsigned char[:, ::1] im = np.ascontiguousarray(img, dtype=np.uint8)
    cdef Py_ssize_t h = im.shape[0], w = im.shape[1]
    gx_arr = np.empty((h, w), dtype=np.int32)
    gy_arr = np.empty((h, w), dtype=np.int32)
    cdef int[:, ::1] gx = gx_arr
    cdef int[:, ::1] gy = gy_arr
    cdef Py_ssize_t i, j, up, dn, lf, rt
    cdef int p00, p01, p02, p10, p12, p20, p21, p22
    for i in range(h):
        up = _clamp_idx(i - 1, h)
        dn = _clamp_idx(i + 1, h)
        for j in range(w):
            lf = _clamp_idx(j - 1, w)
            rt = _clamp_idx(j + 1, w)
            p00 = im[up, lf]
            p01 = im[up, j]
            p02 = im[up, rt]
            p10 = im[i, lf]
            p12 = im[i, rt]
            p20 = im[dn, lf]
            p21 = im[dn, j]
            p22 = im[dn, rt]
            gx[i, j] = (p02 + 2 * p12 + p22) - (p00 + 2 * p10 + p20)
            gy[i, j] = (p20 + 2 * p21 + p22) - (p00 + 2 * p01 + p02)
    return gx_arr, gy_arr


def gradient_magnitude(gx, gy):
    """Euclidean gradient magnitude as float64."""
    cdef const int[:, ::1] x = np.ascontiguousarray(gx, dtype=np.int32)
    cdef const int[:, ::1] y = np.ascontiguousarray(gy, dtype=np.int32)
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1]
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef int a, b
    for i in range(h):
        for j in range(w):
            a = x[i, j]
            b = y[i, j]
            out[i, j] = sqrt(<double> (a * a + b * b))
    return out_arr


def gradient_direction(gx, gy):
    """Quantize gradient angles to bins 0..3 via tangent thresholds."""
    cdef const int[:, ::1] x = np.ascontiguousarray(gx, dtype=np.int32)
    cdef const int[:, ::1] y = np.ascontiguousarray(gy, dtype=np.int32)
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1]
    out_arr = np.empty((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef int a, b
    cdef double ax, ay
    for i in range(h):
        for j in range(w):
            a = x[i, j]
            b = y[i, j]
            ax = a if a >= 0 else -a
            ay = b if b >= 0 else -b
            if ay <= ax * TAN_22_5:
                out[i, j] = 0
            elif ay < ax * TAN_67_5:
                out[i, j] = 1 if (<long long> a) * (<long long> b) > 0 else 3
            else:
                out[i, j] = 2
    return out_arr


def nonmax_suppress(mag, bins):
    """Keep pixels whose magnitude is >= both neighbors along their bin."""
    cdef const double[:, ::1] m = np.ascontiguousarray(mag, dtype=np.float64)
    cdef const unsigned char[:, ::1] d = np.ascontiguousarray(bins, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, y1, x1, y2, x2
    cdef double v, n1, n2
    cdef unsigned char b
    for i in range(h):
        for j in range(w):
            b = d[i, j]
            if b == 0:
                y1 = i; x1 = j - 1; y2 = i; x2 = j + 1
            elif b == 1:
                y1 = i - 1; x1 = j - 1; y2 = i + 1; x2 = j + 1
            elif b == 2:
                y1 = i - 1; x1 = j; y2 = i + 1; x2 = j
            else:
                y1 = i - 1; x1 = j + 1; y2 = i + 1; x2 = j - 1
            n1 = m[y1, x1] if 0 <= y1 < h and 0 <= x1 < w else 0.0
            n2 = m[y2, x2] if 0 <= y2 < h and 0 <= x2 < w else 0.0
            v = m[i, j]
            if v >= n1 and v >= n2:
                out[i, j] = v
    return out_arr


def hysteresis(strong, weak):
    """Grow strong edges through 8-connected chains of weak pixels."""
    cdef const unsigned char[:, ::1] s = np.ascontiguousarray(strong, dtype=np.uint8)
    cdef const unsigned char[:, ::1] wk = np.ascontiguousarray(weak, dtype=np.uint8)
    cdef Py_ssize_t h = s.shape[0], w = s.shape[1]
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    stack_arr = np.empty(h * w, dtype=np.intp)
    cdef Py_ssize_t[::1] stack = stack_arr
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t i, j, y, x, ny, nx, dy, dx
    for i in range(h):
        for j in range(w):
            if s[i, j]:
                out[i, j] = 1
                stack[top] = i * w + j
                top += 1
    while top > 0:
        top -= 1
        y = stack[top] // w
        x = stack[top] % w
        for dy in range(-1, 2):
            ny = y + dy
            if ny < 0 or ny >= h:
                continue
            for dx in range(-1, 2):
                nx = x + dx
                if nx < 0 or nx >= w:
                    continue
                if wk[ny, nx] and not out[ny, nx]:
                    out[ny, nx] = 1
                    stack[top] = ny * w + nx
                    top += 1
    return out_arr.view(np.bool_)


def resize_bilinear_u8(img, Py_ssize_t out_h, Py_ssize_t out_w):
    """Bilinear resize with pixel-center alignment and half-up rounding."""
    cdef const unsigned char[:, ::1] im = np.ascontiguousarray(img, dtype=np.uint8)
    cdef Py_ssize_t in_h = im.shape[0], in_w = im.shape[1]
    out_arr = np.empty((out_h, out_w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, y0, y1, x0, x1
    cdef double sy, sx, fy, fx, p00, p01, p10, p11, t, bo, v
    for i in range(out_h):
        sy = (i + 0.5) * in_h / out_h - 0.5
        if sy < 0.0:
            sy = 0.0
        elif sy > in_h - 1.0:
            sy = in_h - 1.0
        y0 = <Py_ssize_t> floor(sy)
        y1 = y0 + 1
        if y1 > in_h - 1:
            y1 = in_h - 1
        fy = sy - y0
        for j in range(out_w):
            sx = (j + 0.5) * in_w / out_w - 0.5
            if sx < 0.0:
                sx = 0.0
            elif sx > in_w - 1.0:
                sx = in_w - 1.0
            x0 = <Py_ssize_t> floor(sx)
            x1 = x0 + 1
            if x1 > in_w - 1:
                x1 = in_w - 1
            fx = sx - x0
            p00 = im[y0, x0]
            p01 = im[y0, x1]
            p10 = im[y1, x0]
            p11 = im[y1, x1]
            t = (1.0 - fx) * p00 + fx * p01
            bo = (1.0 - fx) * p10 + fx * p11
            v = floor((1.0 - fy) * t + fy * bo + 0.5)
            if v < 0.0:
                v = 0.0
            elif v > 255.0:
                v = 255.0
            out[i, j] = <unsigned char> v
    return out_arr


def haar_dwt2(x):
    """Single-level 2D Haar transform; returns (cA, cH, cV, cD)."""
    cdef const double[:, ::1] im = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t h = im.shape[0], w = im.shape[1]
    cdef Py_ssize_t hh = h // 2, hw = w // 2
    ca_arr = np.empty((hh, hw), dtype=np.float64)
    ch_arr = np.empty((hh, hw), dtype=np.float64)
    cv_arr = np.empty((hh, hw), dtype=np.float64)
    cd_arr = np.empty((hh, hw), dtype=np.float64)
    cdef double[:, ::1] ca = ca_arr
    cdef double[:, ::1] ch = ch_arr
    cdef double[:, ::1] cv = cv_arr
    cdef double[:, ::1] cd = cd_arr
    cdef Py_ssize_t i, j
    cdef double a, b, c, d
    for i in range(hh):
        for j in range(hw):
            a = im[2 * i, 2 * j]
            b = im[2 * i, 2 * j + 1]
            c = im[2 * i + 1, 2 * j]
            d = im[2 * i + 1, 2 * j + 1]
            ca[i, j] = (a + b + c + d) / 2.0
            ch[i, j] = (a + b - c - d) / 2.0
            cv[i, j] = (a - b + c - d) / 2.0
            cd[i, j] = (a - b - c + d) / 2.0
    return ca_arr, ch_arr, cv_arr, cd_arr


def haar_idwt2(ca, ch, cv, cd):
    """Exact inverse of haar_dwt2."""
    cdef const double[:, ::1] A = np.ascontiguousarray(ca, dtype=np.float64)
    cdef const double[:, ::1] H = np.ascontiguousarray(ch, dtype=np.float64)
    cdef const double[:, ::1] V = np.ascontiguousarray(cv, dtype=np.float64)
    cdef const double[:, ::1] D = np.ascontiguousarray(cd, dtype=np.float64)
    cdef Py_ssize_t hh = A.shape[0], hw = A.shape[1]
    out_arr = np.empty((hh * 2, hw * 2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double a, b, c, d
    for i in range(hh):
        for j in range(hw):
            a = A[i, j]
            b = H[i, j]
            c = V[i, j]
            d = D[i, j]
            out[2 * i, 2 * j] = (a + b + c + d) / 2.0
            out[2 * i, 2 * j + 1] = (a + b - c - d) / 2.0
            out[2 * i + 1, 2 * j] = (a - b + c - d) / 2.0
            out[2 * i + 1, 2 * j + 1] = (a - b - c + d) / 2.0
    return out_arr
