"""Build the optional compiled geometry kernels.

The package works without the extension (a numpy fallback is selected at
import time); building it speeds up the polygon-heavy inner loops.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "spatialstrat.kernels._fastgeom",
                sources=["src/spatialstrat/kernels/_fastgeom.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
