"""Build the optional compiled kernels; the package works without them."""

import os
import sys

from setuptools import setup

ext_modules = []
if not os.environ.get("ROADLABEL_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        print("Cython not available; installing the pure-Python kernels only", file=sys.stderr)
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "roadlabel.kernels._ckernels",
                    ["src/roadlabel/kernels/_ckernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
