"""Build script: compiles the optional Cython evaluation kernel.

The package works without the extension (a pure-NumPy implementation is
selected at import time); the kernel only accelerates the optimizer's hot
loop.  Set SWAPSIM_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SWAPSIM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/swapsim/_kernel.pyx"],
            compiler_directives={"language_level": "3"},
        )
        for ext in ext_modules:
            ext.include_dirs.append(np.get_include())
            ext.extra_compile_args.append("-O3")
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
