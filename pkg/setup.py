"""Build script: compiles the optional fast-kernel extension.

The package works without the extension (a pure-Python/numpy fallback is
selected at import time); building it just makes the per-event hot path
faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("slicesim._speedups", ["src/slicesim/_speedups.pyx"])],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
