"""Build script: compiles the optional Cython kernels when Cython is available.

The package works without the compiled extension (a pure-Python fallback is
selected at import time), so build failures here are non-fatal.
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
                "tsdid._kernels_cy",
                sources=["src/tsdid/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps arithmetic bit-identical to the
                # pure-Python kernels (no fused multiply-add).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
