import os

from setuptools import setup

ext_modules = []
if os.environ.get("RSSPLINE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            "src/rsspline/_speedups.pyx",
            compiler_directives={"language_level": 3},
        )
        for ext in ext_modules:
            ext.extra_compile_args = ["-O3"]

setup(ext_modules=ext_modules)
