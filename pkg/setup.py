"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time); compiling it just makes the simulator inner loop and the
basis-system rollouts much faster.  Build in place with:

    python3 setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "famp._kernels._speedups",
                ["src/famp/_kernels/_speedups.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )
else:
    extensions = []

setup(ext_modules=extensions)
