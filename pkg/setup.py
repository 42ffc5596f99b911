import os

from setuptools import Extension, setup

# The compiled kernel is optional: without Cython, or with FMDT_PIT_NO_EXT=1,
# the package installs with the numpy fallback only.
ext_modules = []
if not os.environ.get("FMDT_PIT_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension(
                "fmdt_pit._ckernels",
                ["src/fmdt_pit/_ckernels.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
