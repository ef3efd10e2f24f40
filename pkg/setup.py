"""Build script: compiles the jet kernel when Cython and a toolchain exist.

The package stays importable without the extension; cottonlab.jets falls
back to the numpy lane at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/cottonlab/_jetcore.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("cottonlab: Cython unavailable, building without the compiled kernel")

setup(ext_modules=ext_modules)
