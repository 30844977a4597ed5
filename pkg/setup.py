"""Build hook for the optional compiled kernels.

Everything else is configured in pyproject.toml.  If Cython or a compiler
is unavailable the package installs without the extension and falls back
to the numpy implementations at import time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("numeraire._kernels", ["src/numeraire/_kernels.pyx"],
                   include_dirs=[np.get_include()],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
