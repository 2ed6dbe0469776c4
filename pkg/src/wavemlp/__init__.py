"""Lung CT texture classification.

Preprocessing (resize, normalize, multi-threshold edge detection), Haar
wavelet texture features, a small softmax classifier trained with SGD, a
dragonfly swarm optimizer for its hyperparameters, and an end-to-end
reproducible pipeline with CSV reports.
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
