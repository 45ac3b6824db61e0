"""Build script for the compiled kernel extension.

The package works without the extension (a vectorized numpy fallback is
selected at import time), so the extension is marked optional: a missing
compiler degrades performance, not functionality.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "heisgeo._kernels._ccgeo",
                ["src/heisgeo/_kernels/_ccgeo.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
