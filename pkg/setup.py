"""Build script: compiles the optional fused learner kernel.

The package is pure Python plus one optional Cython extension
(sttsim._kernels._fused). If Cython or a C toolchain is unavailable the
build falls back to the pure-numpy backend, which implements the same
contract.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "sttsim._kernels._fused",
                ["src/sttsim/_kernels/_fused.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
