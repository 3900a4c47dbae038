"""Build script: compiles the optional simulation-kernel extension.

The package is fully functional without the extension (a pure-NumPy lane is
selected at import time), so any failure here falls back to a pure build.
-ffp-contract=off keeps the compiled lane bit-identical to the NumPy lane:
fused multiply-adds would otherwise round differently.
"""

import os
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    numpy_root = os.path.dirname(os.path.dirname(numpy.get_include()))
    ext = Extension(
        "adkit._kernels._fast",
        sources=["src/adkit/_kernels/_fast.pyx"],
        include_dirs=[numpy.get_include()],
        # the C distribution functions (gamma/Poisson/normal samplers) live
        # in numpy's static npyrandom library
        library_dirs=[os.path.join(numpy_root, "random", "lib")],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # noqa: BLE001 - any build-chain failure means pure mode
    print(f"adkit: skipping compiled kernels ({exc}); pure-NumPy lane will be used",
          file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
