"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a NumPy reference
backend is selected at import time); building it just makes the hot
sampling kernels faster.  ``FUNCBALL_SKIP_EXT=1`` skips the build.
"""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("FUNCBALL_SKIP_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "funcball._native",
        ["src/funcball/_native.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
