"""Build script for the optional compiled kernel extension.

The package works without the extension; aoiplan.nnet falls back to the
pure numpy kernels when the compiled module is absent.
"""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "aoiplan.nnet._kern_cy",
                sources=["src/aoiplan/nnet/_kern_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write(
        "aoiplan: compiled kernels unavailable (%s); installing pure python build\n" % exc
    )
    ext_modules = []

setup(ext_modules=ext_modules)
