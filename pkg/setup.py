"""Builds the optional compiled scan kernel.

The package works without the extension: nameguard.kernels falls back to the
pure-Python scanner when the compiled module is absent.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "nameguard.kernels._accel",
                ["src/nameguard/kernels/_accel.pyx"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
