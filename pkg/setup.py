"""Build script: compiles the Cython kernels when Cython is available.

Without Cython (or a C compiler) the package still installs and runs on the
pure-Python kernels in ``fastescape._core_py``.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("FASTESCAPE_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("fastescape._core", ["src/fastescape/_core.pyx"],
                       include_dirs=[numpy.get_include()],
                       extra_compile_args=["-O2", "-fno-fast-math", "-ffp-contract=off"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
