"""Build script: compiles the optional kernel extension.

The package works without the extension (a pure-Python backend is selected
at import time), so a missing Cython or C compiler only costs speed.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sparsalloc._kernels._core",
                ["src/sparsalloc/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
