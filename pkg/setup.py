import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    USE_CYTHON = True
except ImportError:
    USE_CYTHON = False

# SPFSIM_NO_EXT=1 skips the compiled kernels; the pure-Python twin is used instead.
if USE_CYTHON and not os.environ.get("SPFSIM_NO_EXT"):
    extensions = cythonize(
        [
            Extension(
                "spfsim._speedups",
                ["src/spfsim/_speedups.pyx"],
                extra_compile_args=["-O2"],
                language="c++",
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    extensions = []

setup(ext_modules=extensions)
