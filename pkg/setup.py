"""Build script for the optional compiled kernels.

Without Cython (or a C compiler) the package installs as pure Python and
``superhedge.kernels`` falls back to the numpy implementations.
"""
from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    setup()
else:
    extensions = [
        Extension(
            "superhedge._ckernels",
            ["src/superhedge/_ckernels.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
            optional=True,
        )
    ]
    setup(
        ext_modules=cythonize(
            extensions,
            compiler_directives={"language_level": "3"},
        )
    )
