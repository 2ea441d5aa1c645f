from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "polytour.kernels._ckernels",
                ["src/polytour/kernels/_ckernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    # No Cython: install with the numpy kernel fallback only.
    ext_modules = []

setup(ext_modules=ext_modules)
