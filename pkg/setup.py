"""Build the optional Cython kernels.

The package works without them (numpy fallback in ``scibridges._kernels_py``),
so a failed compile only prints a warning.
"""

import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("SCIBRIDGES_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "scibridges._ckernels",
                    ["src/scibridges/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError as exc:
        print(f"warning: building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
