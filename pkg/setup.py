"""Build script: compiles the optional GRU kernel extension when Cython and a
C compiler are available.  Installation succeeds without them; the package then
falls back to the pure-numpy kernels at import time."""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "signtrans.kernels._gru_cy",
                ["src/signtrans/kernels/_gru_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
