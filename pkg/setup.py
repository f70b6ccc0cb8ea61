"""Build script for the optional compiled core; everything else lives in pyproject.toml."""
from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:  # no toolchain: the pure-Python core is used
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "recruitment._core._kernels",
                ["src/recruitment/_core/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
