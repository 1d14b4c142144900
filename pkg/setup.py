"""Build the optional Cython kernels; the package falls back to numpy without them."""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure install
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "mdsfountain._kernels",
                ["src/mdsfountain/_kernels.pyx"],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules, include_dirs=[np.get_include()])
