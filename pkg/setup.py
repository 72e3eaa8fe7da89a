from setuptools import Extension, setup

# The compiled kernel is optional: without Cython (or a working compiler)
# the package falls back to the pure-numpy kernels at import time.
try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "geepc._kernels",
                ["src/geepc/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
