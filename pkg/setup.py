"""Build script. The compiled kernels are optional: if Cython or a C
compiler is unavailable the package installs anyway and falls back to
the numpy implementations at import time."""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext = Extension(
        "nselab._kernels",
        ["src/nselab/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    ext.optional = True  # compile failures must not break the install
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
