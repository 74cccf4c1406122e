import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cocogen.kernels._grid",
                ["src/cocogen/kernels/_grid.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-Python fallback in cocogen.kernels takes over when the
    # compiled module is absent.
    ext_modules = []

setup(ext_modules=ext_modules)
