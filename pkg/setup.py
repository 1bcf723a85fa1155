"""Build script for the optional compiled kernel backend.

The package is fully functional without the extension (a pure-numpy
backend is selected at import time); the Cython module is a drop-in
speedup for the hot loops. If the toolchain is unavailable the build
falls back to a pure-python install instead of failing.
"""

import os
import sys

from setuptools import Extension, setup

PYX = os.path.join("src", "hake", "kernels", "_cy.pyx")

ext_modules = []
if os.path.exists(PYX):
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "hake.kernels._cy",
            sources=[PYX],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level="3")
    except ImportError as exc:  # Cython or numpy missing at build time
        print(f"skipping compiled kernels: {exc}", file=sys.stderr)

setup(ext_modules=ext_modules)
