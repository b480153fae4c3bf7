"""Build script for the compiled integrator core.

The package installs and works without the extension; the pure-Python
fallback is selected at import time when the compiled module is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "affinetherm._kernel._core",
                ["src/affinetherm/_kernel/_core.pyx"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
