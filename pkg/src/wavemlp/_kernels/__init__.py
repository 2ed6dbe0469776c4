"""Image-processing kernels with two interchangeable backends.

At import time the compiled Cython extension is preferred; if it is missing
(no compiler at install time) or ``WAVEMLP_PURE=1`` is set, the pure numpy
fallback is used. Both backends are bit-identical; the active one is named in
``BACKEND``.
"""

from __future__ import annotations

import os

from ._pure import TAN_22_5, TAN_67_5, gaussian_kernel

if os.environ.get("WAVEMLP_PURE") == "1":
    from . import _pure as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

BACKEND: str = _impl.BACKEND_NAME

gaussian_blur_u8 = _impl.gaussian_blur_u8
sobel_gradients = _impl.sobel_gradients
gradient_magnitude = _impl.gradient_magnitude
gradient_direction = _impl.gradient_direction
nonmax_suppress = _impl.nonmax_suppress
hysteresis = _impl.hysteresis
resize_bilinear_u8 = _impl.resize_bilinear_u8
haar_dwt2 = _impl.haar_dwt2
haar_idwt2 = _impl.haar_idwt2

__all__ = [
    "BACKEND",
    "TAN_22_5",
    "TAN_67_5",
    "gaussian_kernel",
    "gaussian_blur_u8",
    "sobel_gradients",
    "gradient_magnitude",
    "gradient_direction",
    "nonmax_suppress",
    "hysteresis",
    "resize_bilinear_u8",
    "haar_dwt2",
    "haar_idwt2",
]
