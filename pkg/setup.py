"""Build script for the optional compiled kernels.

The package works without the extension (a pure-Python backend is selected at
import time), so a failed compile only costs speed, not functionality.
"""

import numpy as np
from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension

# No -ffast-math / -march=native: kernel results must be bit-identical to the
# pure-Python backend, which rules out FP contraction and reassociation.
FLAGS = ["-O3", "-ffp-contract=off"]

extensions = [
    Extension(
        "hsikit._kernels",
        ["src/hsikit/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=FLAGS,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            print(f"warning: skipping compiled kernels ({exc}); "
                  "pure-Python backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "pure-Python backend will be used")


try:
    from Cython.Build import cythonize

    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
