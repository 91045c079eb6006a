"""Build script for the optional compiled kernel core.

The package is fully functional without the extension; ``hrisac.nn``
falls back to the numpy kernels when ``hrisac.nn._mlpcore`` is absent.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hrisac.nn._mlpcore",
                ["src/hrisac/nn/_mlpcore.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    # No Cython available: install as pure Python.
    pass

setup(ext_modules=ext_modules)
