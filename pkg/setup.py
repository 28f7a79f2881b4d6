"""Build script for the optional compiled render kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes the per-pixel shading loop faster.
Set SPECSYNTH_SKIP_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SPECSYNTH_SKIP_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "specsynth._speckern",
                    ["src/specsynth/_speckern.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
