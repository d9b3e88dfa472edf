"""Build script for the optional compiled Monte Carlo kernel.

The package is pure Python except for ``molrelay._mc_core``, a Cython
translation of the chain simulator's inner loop.  The extension links
against numpy's static ``npyrandom`` library so that it draws from the
same PCG64 bit stream as the numpy fallback.  The extension is marked
optional: if no compiler (or no Cython) is available the install still
succeeds and the package transparently uses the pure-numpy kernel.
"""

import os

from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build environment without Cython
    cythonize = None


def extensions():
    if cythonize is None:
        return []
    npyrandom_dir = os.path.join(os.path.dirname(np.random.__file__), "lib")
    ext = Extension(
        "molrelay._mc_core",
        ["src/molrelay/_mc_core.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
