"""Build the optional Cython kernels.

The package works without them: ``varalg._kernels`` falls back to the
pure-Python implementations when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("VARALG_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "varalg._ckernels",
                    ["src/varalg/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
