"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time); build it in place for the fast
dynamic-programming kernels:

    python setup.py build_ext --inplace

Set ZRS_EVAL_NO_EXT=1 to skip the extension entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("ZRS_EVAL_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "zrseval._kernels._dp",
                    sources=["src/zrseval/_kernels/_dp.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
