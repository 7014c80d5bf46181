"""Build script for the optional compiled kernels.

    pip install -e . --no-build-isolation

If Cython or a C compiler is unavailable the package still installs and
falls back to the pure-numpy kernels at import time.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("STIFFKIT_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "stiffkit._ckernels",
                    ["src/stiffkit/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
