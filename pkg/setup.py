import numpy as np
from setuptools import setup, Extension

# The compiled kernels are optional: if Cython or a C compiler is missing the
# package falls back to the numpy implementations selected in cfknn.kernels.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cfknn._ckernels",
                ["src/cfknn/_ckernels.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
