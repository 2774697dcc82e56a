"""Build script: compiles the Monte Carlo kernel extension.

Set TREEPATH_NO_EXT=1 to skip the extension entirely; the package then runs
on the pure-Python/numpy fallback kernels (same results, slower sampling).
"""

import os

from setuptools import setup

if os.environ.get("TREEPATH_NO_EXT"):
    setup()
else:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = [
        Extension(
            "treepath._kernels",
            ["src/treepath/_kernels.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3"],
        )
    ]
    setup(
        ext_modules=cythonize(
            extensions, compiler_directives={"language_level": "3"}
        )
    )
