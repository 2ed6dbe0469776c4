"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure numpy fallback is selected at
import time), so the build is marked optional: a missing compiler degrades to
the fallback instead of failing the install.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "wavemlp._kernels._core",
                ["src/wavemlp/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off keeps float results bit-identical to the
                # numpy fallback (no fused multiply-add contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
